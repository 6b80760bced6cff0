#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kDir = "cli_scratch";

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run(const std::string& args) {
    std::string cmd = std::string(HYPINT_CLI_PATH) + " " + args + " > " +
                      (kDir / "out.txt").string() + " 2> " + (kDir / "err.txt").string();
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kE5Check =
    "[problem]\n"
    "a = u\n"
    "f = -ut + (2/u)*ut^2\n"
    "[reduction]\n"
    "branch = +1\n"
    "g = u\n"
    "[grid]\n"
    "x0 = 0.1\nx1 = 1.0\nt0 = 0.1\nt1 = 1.0\nu_lo = 0.5\nu_hi = 2.0\n"
    "nx = 6\nnt = 6\nnu = 6\nnux = 5\n";

}  // namespace

TEST_CASE("check passes on the catalog reduction and fails on a perturbed g") {
    fs::create_directories(kDir);
    write(kDir / "e5.cfg", kE5Check);
    CHECK(run("check " + (kDir / "e5.cfg").string()) == 0);
    std::string out = slurp(kDir / "out.txt");
    CHECK(out.find("con1") != std::string::npos);
    CHECK(out.find("PASS") != std::string::npos);

    std::string bad = kE5Check;
    auto pos = bad.find("g = u");
    bad.replace(pos, 5, "g = 1.1*u");
    write(kDir / "e5bad.cfg", bad);
    CHECK(run("check " + (kDir / "e5bad.cfg").string()) == 1);
    CHECK(slurp(kDir / "out.txt").find("FAIL") != std::string::npos);
}

TEST_CASE("check on a linear catalog spec reports structural residuals") {
    fs::create_directories(kDir);
    write(kDir / "tel.cfg",
          "[linear]\nspec = telegraph\nc = 1\nq1 = -2\n"
          "[grid]\nx0 = 0.5\nx1 = 1.5\nt0 = 0\nt1 = 1\n");
    CHECK(run("check " + (kDir / "tel.cfg").string()) == 0);
    CHECK(slurp(kDir / "out.txt").find("structural") != std::string::npos);
}

TEST_CASE("commands demand exactly one relevant section") {
    fs::create_directories(kDir);
    write(kDir / "both.cfg",
          "[problem]\na = u\nf = 0\n[reduction]\nbranch = +1\ng = 0\n"
          "[linear]\nspec = telegraph\nc = 1\nq1 = -2\n");
    CHECK(run("check " + (kDir / "both.cfg").string()) == 2);
    CHECK(slurp(kDir / "err.txt").find("exactly one") != std::string::npos);
}

TEST_CASE("config errors exit with status 2 and a single-line diagnostic") {
    fs::create_directories(kDir);
    write(kDir / "bad.cfg", "[reduction]\nbrnach = +1\n");
    CHECK(run("check " + (kDir / "bad.cfg").string()) == 2);
    std::string err = slurp(kDir / "err.txt");
    CHECK(err.find("brnach") != std::string::npos);
    CHECK(std::count(err.begin(), err.end(), '\n') == 1);

    write(kDir / "badg.cfg",
          "[problem]\na = 1\nf = 0\n[reduction]\nbranch = +1\ng = 2*sqrt(u\n");
    CHECK(run("check " + (kDir / "badg.cfg").string()) == 2);
    CHECK(slurp(kDir / "err.txt").find("offset") != std::string::npos);
}

TEST_CASE("reduce writes a byte-reproducible strip CSV and reports breakdown") {
    fs::create_directories(kDir);
    std::string cfg =
        "[problem]\na = u\nf = 2*u*ux^2\n"
        "[reduction]\nbranch = +1\ng = 0\nu0 = sigma\n"
        "[grid]\nx0 = 0.2\nx1 = 2.2\nt_end = 1.3\nn_sigma = 51\nh_t = 0.01\n"
        "[output]\nstrip_csv = " + (kDir / "strip.csv").string() + "\n";
    write(kDir / "reduce.cfg", cfg);
    CHECK(run("reduce " + (kDir / "reduce.cfg").string()) == 0);
    std::string first = slurp(kDir / "strip.csv");
    CHECK(first.substr(0, 12) == "sigma,t,x,u\n");
    CHECK(slurp(kDir / "out.txt").find("breakdown") != std::string::npos);

    CHECK(run("reduce " + (kDir / "reduce.cfg").string()) == 0);
    CHECK(slurp(kDir / "strip.csv") == first);  // byte-identical
}

TEST_CASE("family writes a field CSV; breakdown region exits nonzero") {
    fs::create_directories(kDir);
    std::string good =
        "[family]\nid = e5\nu0 = sigma\n"
        "[grid]\nx0 = 0.2\nx1 = 1.0\nt0 = 0\nt1 = 0.4\nnx = 5\nnt = 5\n"
        "[output]\nfield_csv = " + (kDir / "fam.csv").string() + "\n";
    write(kDir / "fam.cfg", good);
    CHECK(run("family " + (kDir / "fam.cfg").string()) == 0);
    CHECK(slurp(kDir / "fam.csv").substr(0, 6) == "x,t,u\n");

    std::string past =
        "[family]\nid = simple-wave\na = u\nu0 = sigma\n"
        "[grid]\nx0 = 0.2\nx1 = 1.0\nt0 = 1.0\nt1 = 1.2\nnx = 3\nnt = 3\n"
        "[output]\nfield_csv = " + (kDir / "fam2.csv").string() + "\n";
    write(kDir / "fam2.cfg", past);
    CHECK(run("family " + (kDir / "fam2.cfg").string()) == 1);
    CHECK(slurp(kDir / "err.txt").find("multi-valued") != std::string::npos);
}

TEST_CASE("linear-general and verify run end to end") {
    fs::create_directories(kDir);
    std::string gen =
        "[linear]\nspec = telegraph\nc = 1\nq1 = -2\nf1 = 1\nf2 = 0\n"
        "[grid]\nx0 = -1\nx1 = 1\nt0 = 0\nt1 = 1\nnx = 9\nnt = 9\n"
        "[output]\nfield_csv = " + (kDir / "gen.csv").string() + "\n";
    write(kDir / "gen.cfg", gen);
    CHECK(run("linear-general " + (kDir / "gen.cfg").string()) == 0);
    CHECK(slurp(kDir / "gen.csv").substr(0, 6) == "x,t,u\n");

    std::string ver =
        "[linear]\nspec = telegraph\nc = 1\nq1 = -2\nf1 = 1\nf2 = 0\n"
        "[grid]\nx0 = -1\nx1 = 1\nt0 = 0\nt1 = 1\nn_points = 5\ndx = 0.01\n";
    write(kDir / "ver.cfg", ver);
    CHECK(run("verify " + (kDir / "ver.cfg").string()) == 0);
    std::string out = slurp(kDir / "out.txt");
    CHECK(out.find("fd residual") != std::string::npos);
    CHECK(out.find("leapfrog vs solution Linf") != std::string::npos);
}

TEST_CASE("linear-ivp writes the solved field") {
    fs::create_directories(kDir);
    std::string ivp =
        "[linear]\nspec = custom\na = 1\nphi = x^2\npsi = 0\n"
        "[grid]\nx0 = -1\nx1 = 1\nt0 = 0\nt1 = 0.5\nnx = 5\nnt = 5\n"
        "n_sigma = 201\nh_t = 0.005\nx_pad = 1.5\n"
        "[output]\nfield_csv = " + (kDir / "ivp.csv").string() + "\n";
    write(kDir / "ivp.cfg", ivp);
    CHECK(run("linear-ivp " + (kDir / "ivp.cfg").string()) == 0);
    // u = x^2 + t^2: spot value from the CSV
    std::string text = slurp(kDir / "ivp.csv");
    CHECK(text.substr(0, 6) == "x,t,u\n");
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    double worst = 0.0;
    while (std::getline(in, line)) {
        double x, t, u;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &t, &u) == 3);
        worst = std::max(worst, std::abs(u - (x * x + t * t)));
    }
    CHECK(worst <= 1e-6);
}
