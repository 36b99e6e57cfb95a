#include "cli.hpp"
#include "critesn/csv.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = critesn::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in{e.path(), std::ios::binary};
        std::ostringstream s;
        s << in.rdbuf();
        files[e.path().filename().string()] = s.str();
    }
    return files;
}

std::string read(const fs::path& p)
{
    std::ifstream in{p, std::ios::binary};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / "critesn_cli_tests" / name;
    fs::remove_all(p);
    return p;
}

const std::vector<std::vector<std::string>> commands = {
  {"transfer-dump", "--ecps", "-1,0,1", "--variant", "plateau", "--gnuplot"},
  {"sweep-alpha", "--alphas", "0.5,1,1.2", "--horizon", "2000"},
  {"sweep-gamma", "--gammas", "0.8,1,1.2", "--horizon", "2000"},
  {"forgetting", "--input", "iid", "--init", "bit-scale", "--horizon", "2000", "--replicates", "3"},
  {"critical-b"},
  {"lyapunov", "--kind", "random", "--input", "iid", "--k", "5", "--horizon", "2000"},
  {"readout-demo", "--length", "1500"},
};

}  // namespace

TEST_SUITE("cli")
{
    TEST_CASE("every command is byte-for-byte reproducible")
    {
        for (const auto& cmd : commands) {
            CAPTURE(cmd.front());
            std::map<std::string, std::string> first;
            for (const char* threads : {"1", "3"}) {
                const auto dir = scratch(cmd.front() + "_" + threads);
                auto args = cmd;
                args.insert(args.end(), {"--seed", "7", "--threads", threads, "--out", dir.string()});
                const auto r = run(args);
                REQUIRE_MESSAGE(r.code == 0, r.err);
                const auto files = snapshot(dir);
                CHECK_FALSE(files.empty());
                if (first.empty()) first = files;
                else CHECK(files == first);
            }
        }
    }

    TEST_CASE("csv conventions")
    {
        const auto dir = scratch("csv");
        REQUIRE(run({"sweep-alpha", "--alphas", "0.5,1", "--horizon", "2000", "--out", dir.string()}).code == 0);
        const auto text = read(dir / "sweep_alpha.csv");
        CHECK(text.find('\r') == std::string::npos);
        CHECK(text.rfind("alpha,lambda,stderr\n", 0) == 0);
        std::istringstream in{text};
        std::string line;
        std::getline(in, line);
        int rows = 0;
        while (std::getline(in, line)) {
            const auto values = critesn::parse_number_list(line);
            REQUIRE(values.size() == 3);
            for (double v : values) CHECK(critesn::format_number(v) == critesn::format_number(critesn::parse_number(critesn::format_number(v))));
            ++rows;
        }
        CHECK(rows == 2);
        CHECK(text.find("0.5,") != std::string::npos);
    }

    TEST_CASE("transfer dump variants")
    {
        const auto dir = scratch("transfer");
        REQUIRE(run({"transfer-dump", "--ecps", "0", "--out", dir.string()}).code == 0);
        const auto text = read(dir / "transfer.csv");
        CHECK(text.rfind("x,theta,slope\n", 0) == 0);
        CHECK(read(dir / "transfer_ecps.csv") == "ecp,theta\n0,0\n");
        CHECK_FALSE(fs::exists(dir / "transfer.gp"));

        const auto bad = run({"transfer-dump", "--ecps", "1,1.0000001", "--out", dir.string()});
        CHECK(bad.code != 0);
        CHECK(bad.err.find('\n') == bad.err.size() - 1);
    }

    TEST_CASE("config file precedence")
    {
        const auto dir = scratch("config");
        fs::create_directories(dir);
        const auto cfg = dir / "run.cfg";
        {
            std::ofstream out{cfg};
            out << "# shared settings\n"
                << "amplitude = 0.5\n"
                << "seed = 3\n"
                << "horizon = 5000\n";
        }
        const auto out1 = dir / "a";
        REQUIRE(run({"critical-b", "--config", cfg.string(), "--out", out1.string()}).code == 0);
        CHECK(read(out1 / "critical_b.csv").find("\n0.5,") != std::string::npos);

        const auto out2 = dir / "b";
        REQUIRE(run({"critical-b", "--config", cfg.string(), "--amplitude", "0.25", "--out", out2.string()}).code == 0);
        CHECK(read(out2 / "critical_b.csv").find("\n0.25,") != std::string::npos);

        const auto out3 = dir / "c";
        REQUIRE(run({"--config", cfg.string(), "critical-b", "--out", out3.string()}).code == 0);
        CHECK(read(out3 / "critical_b.csv") == read(out1 / "critical_b.csv"));

        {
            std::ofstream out{dir / "bad.cfg"};
            out << "colour = blue\n";
        }
        const auto r = run({"critical-b", "--config", (dir / "bad.cfg").string(), "--out", out3.string()});
        CHECK(r.code != 0);
        CHECK(r.err.find("colour") != std::string::npos);
        CHECK(run({"critical-b", "--config", (dir / "missing.cfg").string()}).code != 0);
    }

    TEST_CASE("errors give a nonzero exit and one line")
    {
        const auto dir = scratch("errors");
        const std::vector<std::vector<std::string>> bad = {
          {"forgetting", "--init", "sideways"},
          {"forgetting", "--horizon", "2000000"},
          {"sweep-alpha", "--horizon", "999"},
          {"sweep-alpha", "--alphas", "0,1"},
          {"sweep-gamma", "--gammas", "3"},
          {"critical-b", "--amplitude", "-1"},
          {"lyapunov", "--method", "guess"},
          {"lyapunov", "--kind", "random", "--method", "derivative-product", "--horizon", "1000"},
          {"transfer-dump", "--variant", "tangent"},
          {"transfer-dump", "--lo", "1", "--hi", "0"},
          {"nonsense"},
          {},
        };
        for (auto args : bad) {
            args.insert(args.end(), {"--out", dir.string()});
            const auto r = run(args);
            CAPTURE(args.front());
            CHECK(r.code != 0);
            CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
        }
    }

    TEST_CASE("help exits cleanly")
    {
        const auto r = run({"--help"});
        CHECK(r.code == 0);
        CHECK(r.out.find("sweep-gamma") != std::string::npos);
    }

    TEST_CASE("lyapunov accepts a reservoir file")
    {
        const auto dir = scratch("lyap");
        REQUIRE(run({"lyapunov", "--kind", "eq7", "--alpha", "0.5", "--horizon", "2000", "--out", dir.string()}).code == 0);
        const auto first = read(dir / "lyapunov.csv");
        CHECK(first.find("renormalized,-0.69") != std::string::npos);
        CHECK(first.find("derivative-product,-0.69") != std::string::npos);

        const auto dir2 = scratch("lyap2");
        REQUIRE(run({"lyapunov", "--reservoir", (dir / "reservoir.txt").string(), "--horizon", "2000", "--out", dir2.string()})
                  .code == 0);
        CHECK(read(dir2 / "lyapunov.csv") == first);

        const auto dir3 = scratch("lyap3");
        REQUIRE(run({"lyapunov", "--reservoir", (dir / "reservoir.txt").string(), "--alpha", "1", "--horizon", "2000",
                     "--out", dir3.string()})
                  .code == 0);
        CHECK(read(dir3 / "reservoir.txt").find("alpha=1\n") != std::string::npos);

        const auto crit = scratch("lyap_eq8");
        REQUIRE(run({"lyapunov", "--kind", "eq8", "--horizon", "2000", "--out", crit.string()}).code == 0);
        const auto crit2 = scratch("lyap_eq8_again");
        REQUIRE(run({"lyapunov", "--reservoir", (crit / "reservoir.txt").string(), "--horizon", "2000", "--out",
                     crit2.string()})
                  .code == 0);
        CHECK(read(crit2 / "lyapunov.csv") == read(crit / "lyapunov.csv"));
        CHECK(read(crit2 / "lyapunov.txt").find("start orbit") != std::string::npos);
    }
}
