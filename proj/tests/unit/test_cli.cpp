#include "regime_ogarch/bundle.hpp"
#include "regime_ogarch/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ogarch;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("regime_ogarch_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("usage errors") {
    CHECK(cli({}).code == kExitUsage);
    const auto r = cli({"backtest", "--no-such-flag", "x.csv"});
    CHECK(r.code == kExitUsage);
    CHECK_FALSE(r.err.empty());
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("the installed binary reports exit codes") {
    const std::string bin = REGIME_OGARCH_CLI;
    CHECK(std::system((bin + " --bogus > /dev/null 2>&1").c_str()) != 0);
    CHECK(std::system((bin + " --help > /dev/null 2>&1").c_str()) == 0);
}

TEST_CASE("data errors") {
    const auto dir = scratch("data");
    CHECK(cli({"fit", "--model", "garch", (dir / "missing.csv").string()}).code == kExitData);
    std::ofstream(dir / "bad.csv") << "date,x\n1,abc\n";
    CHECK(cli({"fit", "--model", "garch", (dir / "bad.csv").string()}).code == kExitData);
}

TEST_CASE("simulate, fit, forecast, backtest and evaluate") {
    const auto dir = scratch("pipeline");
    REQUIRE(cli({"simulate", "--preset", "square-wave", "--seed", "7", "-o", dir.string(), "--length", "320"}).code ==
            kExitOk);
    const auto csv = dir / "square-wave.csv";
    REQUIRE(fs::exists(csv));
    REQUIRE(fs::exists(dir / "square-wave.json"));
    CHECK(count_lines(csv) == 321);

    const auto fit = cli({"fit", "--model", "garch", "--column", "asset2", csv.string()});
    REQUIRE(fit.code == kExitOk);
    const auto fj = Json::parse(fit.out);
    CHECK(fj.contains("garch"));

    const auto mrs = cli({"fit", "--model", "mrsgarch", csv.string()});
    REQUIRE(mrs.code == kExitOk);
    const auto mj = Json::parse(mrs.out);
    CHECK(mj.contains("mrsgarch"));
    CHECK(mj.contains("lr_test"));

    const auto fc = cli({"forecast", "--model", "ogarch", "--horizon", "5", "--window", "200", csv.string()});
    REQUIRE(fc.code == kExitOk);
    const auto cj = Json::parse(fc.out);
    CHECK(cj.at("daily").size() == 5);
    CHECK(cj.at("gmvp_weights").size() == 2);

    const auto a = dir / "a";
    const auto b = dir / "b";
    REQUIRE(cli({"backtest", "--model", "ewma", "--window", "200", "--horizon", "5", "-o", a.string(), csv.string()})
                .code == kExitOk);
    REQUIRE(cli({"backtest", "--model", "mrsogarch", "--components", "1", "--window", "200", "--horizon", "5",
                 "--threads", "2", "-o", b.string(), csv.string()})
                .code == kExitOk);
    for (const auto& bundle : {a, b}) {
        CHECK(fs::exists(bundle / "config.json"));
        CHECK(fs::exists(bundle / "report.json"));
        CHECK(count_lines(bundle / "weights.csv") == 116 + 1);
        CHECK(fs::exists(bundle / "forecasts"));
    }
    const auto rows = read_bundle(b.string());
    CHECK(rows.dates.size() == 116);

    const auto ev = cli({"evaluate", "--dm", a.string(), b.string(), "--horizon", "5", "-o", (dir / "ev.json").string()});
    REQUIRE(ev.code == kExitOk);
    CHECK(ev.out.find("MSE1") != std::string::npos);
    CHECK(ev.out.find("R2LOG") != std::string::npos);
    const auto ej = read_json_file((dir / "ev.json").string());
    CHECK(ej.at("dm").contains("MAD2"));

    // evaluation output agrees with the in-process test on the bundle series
    const auto ra = read_bundle(a.string());
    const auto sa = loss_series(ra.proxy_abs_return, ra.eq_variance_forecast, Loss::Mse1);
    const auto sb = loss_series(rows.proxy_abs_return, rows.eq_variance_forecast, Loss::Mse1);
    const auto dm = dm_test(sa, sb, 5);
    CHECK(ej.at("dm").at("MSE1").at("statistic").get<double>() == doctest::Approx(dm.statistic).epsilon(1e-12));
}

TEST_CASE("config file values and flag overrides") {
    const auto dir = scratch("config");
    REQUIRE(cli({"simulate", "--preset", "square-wave", "-o", dir.string(), "--length", "260"}).code == kExitOk);
    std::ofstream(dir / "cfg.json") << R"({"model": "ewma", "window": {"in_sample_len": 240}})";
    const auto out = dir / "bundle";
    REQUIRE(cli({"backtest", "--config", (dir / "cfg.json").string(), "-o", out.string(),
                 (dir / "square-wave.csv").string()})
                .code == kExitOk);
    CHECK(count_lines(out / "weights.csv") == 20 + 1);
    const auto cfg = read_json_file((out / "config.json").string());
    CHECK(cfg.at("model") == "ewma");

    std::ofstream(dir / "typo.json") << R"({"modle": "ewma"})";
    CHECK(cli({"backtest", "--config", (dir / "typo.json").string(), "-o", out.string(),
               (dir / "square-wave.csv").string()})
              .code != kExitOk);
}

TEST_CASE("regime-block preset and sweep") {
    const auto dir = scratch("sweep");
    REQUIRE(cli({"simulate", "--preset", "regime-blocks", "--dims", "4", "-o", dir.string()}).code == kExitOk);
    const auto sw = cli({"sweep", "--model", "ogarch", "--truth", (dir / "regime-blocks.json").string(), "--k", "1,4",
                         "--window", "500", "--step", "250", "-o", (dir / "sweep.csv").string(),
                         (dir / "regime-blocks.csv").string()});
    REQUIRE(sw.code == kExitOk);
    CHECK(count_lines(dir / "sweep.csv") == 3);
}
