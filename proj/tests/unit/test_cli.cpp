#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Result {
    int code;
    std::string out;  // stdout and stderr
};

Result run(const std::string& args) {
    const std::string cmd = std::string(QOE_CLI_PATH) + " " + args + " 2>&1";
    Result r{-1, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("roots") {
    auto r = run("roots --rate 1.2");
    CHECK(r.code == 0);
    CHECK(r.out.find("rbar=0.376437997") != std::string::npos);

    r = run("roots --rate 0.9");
    CHECK(r.code == 3);
    CHECK(r.out.find("R > 1") != std::string::npos);

    r = run("roots --r0 1.05 --rc 0.15");
    CHECK(r.code == 0);
    for (const char* key : {"alpha0=0.09838692", "alpha1=0.37643799", "beta=4.024054", "theta=3.826097"}) {
        CHECK(r.out.find(key) != std::string::npos);
    }
}

TEST_CASE("region and threshold") {
    auto r = run("region --d 10");
    CHECK(r.code == 0);
    CHECK(r.out.find("region=infeasible") != std::string::npos);

    r = run("threshold --policy risky --d 20 --eps 1e-3 --r0 1.05 --rc 0.15");
    CHECK(r.code == 0);
    CHECK(r.out.find("threshold=23.33683") != std::string::npos);
    CHECK(r.out.find("is_bound=1") != std::string::npos);

    r = run("threshold --policy safe");
    CHECK(r.out.find("level=78.0454") != std::string::npos);
    r = run("threshold --policy offline");
    CHECK(r.out.find("switch_time=406.318") != std::string::npos);

    CHECK(run("threshold --policy risky --d 10").code == 2);
    CHECK(run("threshold --policy bogus").code == 1);
    CHECK(run("threshold --d abc").code == 1);
    CHECK(run("").code == 1);
    CHECK(run("threshold --eps 1.5").code == 3);
}

TEST_CASE("simulate") {
    auto r = run("simulate --policy free-only --d 5 --r0 2 --rc 0.1 --trials 2000 --seed 4");
    CHECK(r.code == 0);
    CHECK(r.out.find("p_hat=") != std::string::npos);
    CHECK(r.out.find("trials=2000") != std::string::npos);
    const auto again = run("simulate --policy free-only --d 5 --r0 2 --rc 0.1 --trials 2000 --seed 4 --threads 2");
    // Identical apart from nothing: the kernel line is the same on one machine.
    CHECK(again.out == r.out);
    CHECK(run("simulate --policy safe --d 10").code == 2);
    CHECK(run("simulate --policy risky --param 6 --d 5 --r0 1.5 --rc 0.5 --trials 100").code == 0);
}

TEST_CASE("sweep: config precedence, unknown keys and missing files") {
    TempDir dir("qoe_cli_sweep");
    const auto cfg = dir.path / "run.cfg";
    {
        std::ofstream os(cfg);
        os << "# small fast sweep\n"
           << "r0 = 1.5\nrc = 0.5\neps = 0.01\nd_min = 3\nd_max = 5\nd_step = 1\n"
           << "trials = 100000\npolicies = safe, risky\noutput = " << dir.path.string() << "\n";
    }
    auto r = run("sweep --config " + cfg.string() + " --trials 300");
    CHECK(r.code == 0);
    const std::string meta = slurp(dir.path / "fig2.csv.meta.json");
    CHECK(meta.find("\"trials\": 300") != std::string::npos);
    const std::string fig2 = slurp(dir.path / "fig2.csv");
    const std::string fig1 = slurp(dir.path / "fig1.csv");
    CHECK(fig1.rfind("D,T_star,D_bar_flag\n", 0) == 0);
    CHECK(fig2.find("\n3,safe,") != std::string::npos);

    // Same seed, same bytes.
    r = run("sweep --config " + cfg.string() + " --trials 300 --threads 3");
    CHECK(slurp(dir.path / "fig2.csv") == fig2);

    const auto bad = dir.path / "bad.cfg";
    {
        std::ofstream os(bad);
        os << "trails=5\n";
    }
    r = run("sweep --config " + bad.string());
    CHECK(r.code == 1);
    CHECK(r.out.find("trails") != std::string::npos);

    const auto out2 = dir.path / "flags_only";
    r = run("sweep --config " + (dir.path / "missing.cfg").string() +
            " --r0 1.5 --rc 0.5 --eps 0.01 --d-min 3 --d-max 4 --d-step 1 --trials 50 --policies risky"
            " --figure 2 --output " + out2.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("warning") != std::string::npos);
    CHECK(std::filesystem::exists(out2 / "fig2.csv"));
    CHECK_FALSE(std::filesystem::exists(out2 / "fig1.csv"));

    r = run("sweep --policies \"\" --figure 1 --output " + out2.string());
    CHECK(r.code == 3);
}

TEST_CASE("hjb-check writes its CSV and skips boundary rows") {
    TempDir dir("qoe_cli_hjb");
    auto r = run("hjb-check --grid-x 6 --grid-p 5 --trials 20 --horizon 5 --steps 1e-3,5e-4 --output " +
                 dir.path.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("argmin_agreement=") != std::string::npos);
    CHECK(r.out.find("step1_manifold_max_deviation=") != std::string::npos);
    const std::string csv = slurp(dir.path / "hjb.csv");
    CHECK(csv.rfind("x,p,lhs,rhs,residual,argmin_u,in_exact_zone\n", 0) == 0);
    CHECK(slurp(dir.path / "hjb.csv.meta.json").find("\"anchor_eps\"") != std::string::npos);
    CHECK(r.out.find("beta_theta_mismatch=1") != std::string::npos);

    r = run("hjb-check --x-min 0.001 --x-max 2 --grid-x 3 --grid-p 3 --trials 2 --horizon 1 --output " +
            dir.path.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("warning: skipped") != std::string::npos);

    CHECK(run("hjb-check --grid-x 2 --grid-p 2 --trials 2 --steps 2e-3 --output " + dir.path.string()).code == 3);
}
