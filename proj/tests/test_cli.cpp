// End-to-end tests that drive the built command-line binary as a subprocess.
// QGEM_BIN is injected by the build as the path to the executable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "qgem/config_io.hpp"

#ifndef QGEM_BIN
#error "QGEM_BIN must point at the CLI executable"
#endif

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path temp_file(const std::string& stem, const std::string& ext) {
    static int counter = 0;
    return fs::temp_directory_path() /
           ("qgem_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" +
            stem + ext);
}

RunResult run_cli(const std::string& args) {
    const fs::path errfile = temp_file("stderr", ".txt");
    const std::string cmd = std::string(QGEM_BIN) + " " + args + " 2>" + errfile.string();
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream ef(errfile, std::ios::binary);
    std::stringstream ss;
    ss << ef.rdbuf();
    r.err = ss.str();
    fs::remove(errfile);
    return r;
}

std::string write_temp(const std::string& stem, const std::string& content) {
    const fs::path p = temp_file(stem, ".json");
    std::ofstream f(p, std::ios::binary);
    f << content;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Minimal CSV reader for the CRLF tables the tool emits (no quoted fields
// in the numeric tables).
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    size_t pos = 0;
    while (pos < text.size()) {
        const size_t nl = text.find("\r\n", pos);
        REQUIRE(nl != std::string::npos); // every line must be CRLF-terminated
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 2;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t f = 0;
        while (true) {
            const size_t comma = line.find(',', f);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(f));
                break;
            }
            fields.push_back(line.substr(f, comma - f));
            f = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

const std::string kInfeasibleConfig = R"({"schema": 1, "mass": "1e-14 kg"})";
const std::string kFeasibleConfig =
    R"({"schema": 1, "mass": "1e-14 kg", "d": "8 um", "dx": "2 um"})";

} // namespace

TEST_CASE("constants prints the CODATA table") {
    const auto r = run_cli("constants");
    CHECK(r.exit_code == 0);
    CHECK(r.err.empty());
    const json j = json::parse(r.out);
    CHECK(j["G"].get<double>() == 6.67430e-11);
    CHECK(j["hbar"].get<double>() == 1.054571817e-34);
    CHECK(j["c"].get<double>() == 2.99792458e8);
    CHECK(j["eps0"].get<double>() == 8.8541878128e-12);
    CHECK(j["k_B"].get<double>() == 1.380649e-23);
    CHECK(j["e"].get<double>() == 1.602176634e-19);
    CHECK(j["units"]["G"].is_string());
    CHECK(j["notes"]["hbar"].get<std::string>() == "reduced Planck");

    const auto csv = run_cli("constants --format csv");
    CHECK(csv.exit_code == 0);
    const auto rows = parse_csv(csv.out);
    REQUIRE(rows.size() >= 8);
    CHECK(rows[0] == std::vector<std::string>{"name", "value", "unit", "note"});
}

TEST_CASE("sg trace reproduces the picometer-splitting example") {
    const std::string flags =
        "--mass \"2e-15 kg\" --t1 \"0.25 ms\" --pair 0,-1 --gradient \"1e4 T/m\"";
    const auto r = run_cli("sg trace " + flags + " --samples 2001");
    CHECK(r.exit_code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() > 2000);
    CHECK(rows[0] == std::vector<std::string>{"t", "x_left", "x_right", "v_left", "v_right"});

    double max_sep = 0.0, final_sep = 1.0, final_dv = 1.0, t_last = 0.0;
    for (size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 5);
        const double t = std::stod(rows[i][0]);
        const double sep = std::abs(std::stod(rows[i][1]) - std::stod(rows[i][2]));
        max_sep = std::max(max_sep, sep);
        t_last = t;
        final_sep = sep;
        final_dv = std::abs(std::stod(rows[i][3]) - std::stod(rows[i][4]));
    }
    CHECK(t_last == doctest::Approx(1e-3).epsilon(1e-12)); // 4 t1
    CHECK(max_sep == doctest::Approx(5.804950683385906e-12).epsilon(1e-9));
    CHECK(final_sep == 0.0); // the sequence closes exactly
    CHECK(final_dv == 0.0);

    const auto js = run_cli("sg trace " + flags + " --format json");
    CHECK(js.exit_code == 0);
    const json j = json::parse(js.out);
    CHECK(j["max_separation"].get<double>() ==
          doctest::Approx(5.804950683385906e-12).epsilon(1e-12));
    CHECK(j["closure_position"].get<double>() == 0.0);
    CHECK(j["closure_velocity"].get<double>() == 0.0);
}

TEST_CASE("sg fringe reports the tilt discrepancy") {
    const auto r = run_cli(
        "sg fringe --mass \"2e-15 kg\" --t1 \"0.25 ms\" --pair 0,-1 --gradient \"1e4 T/m\"");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["fringe_tilt"].get<double>() ==
          doctest::Approx(1.1635592078284671e-05).epsilon(1e-9));
    CHECK(j["reference_tilt"].get<double>() == 3.5e-3);
    const auto note = j["note"].get<std::string>();
    CHECK(note.find("unreconciled parameters") != std::string::npos);
    // the quoted tilt is ~300 fringes deep for this configuration
    CHECK(j["tilt_phase_at_reference_tilt"].get<double>() / (2 * M_PI) > 250.0);
    CHECK(j["tilt_phase_at_theta"].get<double>() > 0.0);
}

TEST_CASE("entangle phases and witness at the nominal point") {
    const auto r = run_cli("entangle phases");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["ll"].get<double>() == doctest::Approx(0.1582229842578848).epsilon(1e-12));
    CHECK(j["entangling_phase"].get<double>() ==
          doctest::Approx(0.02109639790105129).epsilon(1e-9));

    const auto w = run_cli("entangle witness");
    CHECK(w.exit_code == 0); // witness > 1: certifiable
    const json jw = json::parse(w.out);
    CHECK(jw["witness"].get<double>() == doctest::Approx(1.0105480033449314).epsilon(1e-9));
    CHECK(jw["frame_optimized"].get<bool>());
    CHECK(jw["runs_required"].get<long>() > 100000); // small margin, many repetitions
    CHECK(jw["negativity"].get<double>() == doctest::Approx(0.005274001672465778).epsilon(1e-9));

    // strong dephasing kills the certificate and flips the exit code
    const auto dead = run_cli("entangle witness --gamma1 \"50 1/s\" --gamma2 \"50 1/s\"");
    CHECK(dead.exit_code == 2);
    const json jd = json::parse(dead.out);
    CHECK(jd["witness"].get<double>() < 1.0);
    CHECK(jd["runs_required"].is_null());
    CHECK(jd["note"].get<std::string>().find("not certifiable") != std::string::npos);
}

TEST_CASE("entangle state emits a valid density matrix") {
    const auto r = run_cli("entangle state");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j["rho"].size() == 4);
    double trace = 0.0;
    for (int i = 0; i < 4; ++i) {
        CHECK(j["rho"][i][i][0].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(j["rho"][i][i][1].get<double>() == 0.0);
        trace += j["rho"][i][i][0].get<double>();
    }
    CHECK(trace == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j["basis"][0].get<std::string>() == "LL");
}

TEST_CASE("background dipole prints both ratio estimates") {
    const auto r = run_cli("background dipole");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["ratio_anchored"].get<double>() == 3.0e6);
    CHECK(j["ratio_first_principles"].get<double>() ==
          doctest::Approx(3.456658454582108e6).epsilon(1e-9));
    CHECK(j["ratio"].get<double>() == 3.0e6);
    CHECK(j["kappa"].get<double>() == 1.0);

    const auto csv = run_cli("background dipole --format csv");
    const auto rows = parse_csv(csv.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"ratio_anchored", "ratio_first_principles", "kappa"});
    CHECK(std::stod(rows[1][0]) == 3.0e6);
}

TEST_CASE("background casimir point and sweep") {
    const auto pt = run_cli("background casimir --z \"1.1 um\"");
    CHECK(pt.exit_code == 0);
    const json j = json::parse(pt.out);
    CHECK(j["regime"].get<std::string>() == "pfa");
    CHECK(j["force_pfa"].get<double>() ==
          doctest::Approx(-2.722977050309745e-12).epsilon(1e-9));
    CHECK(j["pfa_valid"].get<bool>());
    CHECK(j["freq_shift"].get<double>() > 0.0);
    CHECK(j["min_detectable"].get<double>() > 0.0);

    const auto sweep = run_cli("background casimir --points 50");
    CHECK(sweep.exit_code == 0);
    const auto rows = parse_csv(sweep.out);
    REQUIRE(rows.size() == 51);
    CHECK(rows[0] ==
          std::vector<std::string>{"z", "force", "regime", "freq_shift", "min_detectable"});
    bool saw_pfa = false, saw_cp = false, saw_transition = false;
    for (size_t i = 1; i < rows.size(); ++i) {
        saw_pfa |= rows[i][2] == "pfa";
        saw_cp |= rows[i][2] == "casimir_polder";
        saw_transition |= rows[i][2] == "transition";
        CHECK(std::stod(rows[i][1]) < 0.0); // attraction everywhere
    }
    CHECK(saw_pfa);
    CHECK(saw_cp);
    CHECK(saw_transition);
}

TEST_CASE("background shield and detect") {
    const auto r = run_cli("background shield");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["kappa_img"].get<double>() == 2.0);
    CHECK(j["image_force"].get<double>() == doctest::Approx(1.384244e-23).epsilon(1e-4));

    const auto d = run_cli("background detect");
    CHECK(d.exit_code == 0);
    const json jd = json::parse(d.out);
    CHECK(jd["detect_range"].get<double>() > 1e-6);
    CHECK(jd["detect_range"].get<double>() < 1e-3);
    CHECK(jd["min_detectable"].get<double>() > 0.0);
    CHECK(jd["assumptions"].size() >= 2);
}

TEST_CASE("budget check verdicts, overrides, and file output") {
    const std::string infeasible = write_temp("infeasible", kInfeasibleConfig);
    const std::string feasible = write_temp("feasible", kFeasibleConfig);

    auto r = run_cli("budget check --config " + infeasible);
    CHECK(r.exit_code == 2); // reported, but not feasible
    json j = json::parse(r.out);
    CHECK_FALSE(j["feasible"].get<bool>());
    CHECK(j["phi_grav"].get<double>() == doctest::Approx(0.02109639790105129).epsilon(1e-9));
    CHECK(j["constraints"].size() == 5);
    CHECK(j["assumptions"].size() >= 4);
    CHECK(j["config"]["mass"].get<std::string>() == "1e-14 kg");

    r = run_cli("budget check --config " + feasible);
    CHECK(r.exit_code == 0);
    j = json::parse(r.out);
    CHECK(j["feasible"].get<bool>());
    CHECK(j["runs_required"].get<long>() > 0);

    // --set rescues the infeasible base config
    r = run_cli("budget check --config " + infeasible +
                " --set \"d=8 um\" --set \"dx=2 um\"");
    CHECK(r.exit_code == 0);
    j = json::parse(r.out);
    CHECK(j["feasible"].get<bool>());
    CHECK(j["config"]["d"].get<std::string>() == "8e-06 m");

    // --out writes the report to a file and keeps stdout empty
    const fs::path outfile = temp_file("report", ".json");
    r = run_cli("budget check --config " + feasible + " --out " + outfile.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());
    j = json::parse(slurp(outfile.string()));
    CHECK(j["feasible"].get<bool>());
    fs::remove(outfile);

    // CSV summary row
    r = run_cli("budget check --config " + feasible + " --format csv");
    CHECK(r.exit_code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"phi_grav", "phi_dip", "negativity", "witness",
                                              "runs", "ratio", "pass"});
    CHECK(rows[1][6] == "1");

    fs::remove(infeasible);
    fs::remove(feasible);
}

TEST_CASE("config errors exit 1 with empty stdout") {
    const std::string unknown_key =
        write_temp("unknown", R"({"schema": 1, "mass": "1e-14 kg", "masss": 3})");
    auto r = run_cli("budget check --config " + unknown_key);
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
    CHECK(r.err.find("error:") != std::string::npos);
    fs::remove(unknown_key);

    const std::string wrong_unit =
        write_temp("wrongunit", R"({"schema": 1, "mass": "1e-14 s"})");
    r = run_cli("budget check --config " + wrong_unit);
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
    fs::remove(wrong_unit);

    r = run_cli("budget check"); // --config missing
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());

    r = run_cli("budget check --config /nonexistent/qgem.json");
    CHECK(r.exit_code == 1);

    const std::string cfg = write_temp("base", kInfeasibleConfig);
    r = run_cli("budget check --config " + cfg + " --set \"mass=banana\"");
    CHECK(r.exit_code == 1);
    r = run_cli("budget check --config " + cfg + " --set \"no.such.path=1 s\"");
    CHECK(r.exit_code == 1);
    r = run_cli("scan --config " + cfg + " --axis \"mass=-1 kg:1 kg:5:log\"");
    CHECK(r.exit_code == 1);
    r = run_cli("scan --config " + cfg); // no axes anywhere
    CHECK(r.exit_code == 1);
    fs::remove(cfg);
}

TEST_CASE("scan output is byte-identical across runs and worker counts") {
    const std::string cfg = write_temp("scanbase", kInfeasibleConfig);
    const std::string axes =
        " --axis \"mass=1e-14 kg:1e-13 kg:5:log\" --axis \"tau=0.5 s:1 s:4\"";

    const auto a = run_cli("scan --config " + cfg + axes);
    const auto b = run_cli("scan --config " + cfg + axes);
    const auto c = run_cli("scan --config " + cfg + axes + " --workers 4");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);

    const auto rows = parse_csv(a.out);
    REQUIRE(rows.size() == 21); // header + 5*4 points
    CHECK(rows[0] == std::vector<std::string>{"mass", "tau", "phi_grav", "phi_dip", "negativity",
                                              "witness", "runs", "ratio", "pass"});
    // first axis slowest: the mass column repeats in blocks of four
    CHECK(rows[1][0] == rows[4][0]);
    CHECK(rows[1][0] != rows[5][0]);
    CHECK(std::stod(rows[1][0]) == 1e-14);
    CHECK(std::stod(rows[20][0]) == doctest::Approx(1e-13).epsilon(1e-12));

    const auto js = run_cli("scan --config " + cfg + axes + " --seed 7 --format json");
    CHECK(js.exit_code == 0);
    const json j = json::parse(js.out);
    CHECK(j["schema"].get<int>() == 1);
    CHECK(j["seed"].get<std::uint64_t>() == 7);
    CHECK(j["rows"].size() == 20);
    CHECK(j["rows"][0]["coords"]["mass"].get<double>() == 1e-14);
    CHECK(j["rows"][0]["coords"]["tau"].get<double>() == 0.5);
    // phase is linear in tau: half the nominal 1 s value at tau = 0.5 s
    CHECK(j["rows"][0]["report"]["phi_grav"].get<double>() ==
          doctest::Approx(0.010548198950525645).epsilon(1e-9));
    fs::remove(cfg);
}

TEST_CASE("optimize finds the feasible pocket from the command line") {
    const std::string cfg = write_temp("optbase", kFeasibleConfig);
    const auto r = run_cli("optimize --config " + cfg +
                           " --axis \"d=8 um:100 um:4:log\" --axis \"tau=0.5 s:1 s:2\"" +
                           " --objective witness_margin");
    CHECK(r.exit_code == 0);
    const json j = json::parse(r.out);
    CHECK(j["objective"].get<std::string>() == "witness_margin");
    CHECK(j["objective_value"].get<double>() > 0.3);
    CHECK(j["report"]["feasible"].get<bool>());
    CHECK(j["coords"].contains("d"));
    CHECK(j["coords"].contains("tau"));
    const double d_opt = j["coords"]["d"].get<double>();
    CHECK(d_opt >= 8e-6);
    CHECK(d_opt <= 1e-4);
    fs::remove(cfg);
}

TEST_CASE("help text lists the subcommands") {
    const auto r = run_cli("--help");
    CHECK(r.exit_code == 0);
    for (const char* name : {"constants", "sg", "entangle", "background", "budget", "scan",
                             "optimize"})
        CHECK(r.out.find(name) != std::string::npos);

    const auto sg = run_cli("sg trace --help");
    CHECK(sg.exit_code == 0);
    CHECK(sg.out.find("--mass") != std::string::npos);
    CHECK(sg.out.find("--t1") != std::string::npos);
}

TEST_CASE("unit errors from flags exit 1") {
    const auto r = run_cli("sg trace --mass \"1e-14 m\"");
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("csv fields are quoted per RFC 4180") {
    CHECK(qgem::io::csv_field("plain") == "plain");
    CHECK(qgem::io::csv_field("a,b") == "\"a,b\"");
    CHECK(qgem::io::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(qgem::io::csv_field("line\nbreak") == "\"line\nbreak\"");
}
