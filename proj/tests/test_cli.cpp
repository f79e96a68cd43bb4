#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "discort/common.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Runs the installed binary with stdout/stderr captured to temp files.
CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const auto base = fs::temp_directory_path() /
                      ("discort_cli_" + std::to_string(::getpid()) + "_" +
                       std::to_string(counter++));
    const auto out_path = base.string() + ".out";
    const auto err_path = base.string() + ".err";
    const std::string cmd =
        std::string(DISCORT_BIN) + " " + args + " >'" + out_path + "' 2>'" + err_path + "'";
    const int rc = std::system(cmd.c_str());
    CliResult r;
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    fs::remove(out_path);
    fs::remove(err_path);
    return r;
}

// Count of newline characters; usage errors must be single-line.
std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (const char ch : text)
        if (ch == '\n') ++lines;
    return lines;
}

// One scratch tree per test process to keep artifacts apart.
fs::path scratch_dir(const std::string& name) {
    const auto dir =
        fs::temp_directory_path() / ("discort_cli_ws_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small planted dataset shared by the workflow tests; tunables mirror it so
// every stage sees the same config hash.
const std::string kSynthFlags =
    "--n-clusters 2 --things-per-cluster 3 --users 4 --days 20 --events-per-day 40 "
    "--noise-rate 0 --seed 11";
const std::string kEvalFlags = "--fractions 0.34 --reps 2 --k 2 --k-eig 2";

std::string data_flags(const fs::path& data) {
    return "--events '" + (data / "events.csv").string() + "' --friendships '" +
           (data / "friendships.csv").string() + "' --metadata '" +
           (data / "metadata.jsonl").string() + "'";
}

}  // namespace

TEST_CASE("version and help exit cleanly") {
    const auto version = run_cli("--version");
    CHECK(version.status == 0);
    CHECK(version.out == "discort 1.0.0\n");

    const auto help = run_cli("--help");
    CHECK(help.status == 0);
    CHECK(help.out.find("pipeline") != std::string::npos);
    CHECK(help.out.find("synth") != std::string::npos);

    const auto sub_help = run_cli("rwr --help");
    CHECK(sub_help.status == 0);
    CHECK(sub_help.out.find("--seed-thing") != std::string::npos);
}

TEST_CASE("usage errors are single-line and exit 2") {
    const auto none = run_cli("");
    CHECK(none.status == 2);
    CHECK(line_count(none.err) == 1);

    const auto unknown = run_cli("frobnicate");
    CHECK(unknown.status == 2);
    CHECK(line_count(unknown.err) == 1);

    const auto bad_flag = run_cli("rgt --no-such-flag 1");
    CHECK(bad_flag.status == 2);

    // range violations name the flag and the range, before any file I/O
    const auto bad_c = run_cli("rgt --events missing.csv --friendships f.csv --c 1.5");
    CHECK(bad_c.status == 2);
    CHECK(line_count(bad_c.err) == 1);
    CHECK(bad_c.err.find("--c must be in (0, 1], got 1.5") != std::string::npos);

    const auto bad_theta = run_cli("pipeline --theta 0");
    CHECK(bad_theta.status == 2);
    CHECK(bad_theta.err.find("--theta must be in (0, 1], got 0") != std::string::npos);

    const auto missing_required = run_cli("train");
    CHECK(missing_required.status == 2);

    const auto missing_events = run_cli("rgt");
    CHECK(missing_events.status == 2);
    CHECK(missing_events.err.find("--events is required") != std::string::npos);
}

TEST_CASE("runtime failures exit 1 with a single-line error") {
    const auto absent = run_cli("ingest --events /nonexistent/events.csv");
    CHECK(absent.status == 1);
    CHECK(line_count(absent.err) == 1);
    CHECK(absent.err.rfind("discort: error: ", 0) == 0);
}

TEST_CASE("synth, ingest, and the single-output subcommands") {
    const auto dir = scratch_dir("synth");
    const auto data = dir / "data";

    const auto synth =
        run_cli("synth " + kSynthFlags + " --out-dir '" + data.string() + "'");
    REQUIRE(synth.status == 0);
    for (const char* name : {"events.csv", "friendships.csv", "metadata.jsonl", "truth.json"})
        CHECK(fs::exists(data / name));
    CHECK(slurp(data / "events.csv").rfind("# config,", 0) == 0);
    CHECK(slurp(data / "truth.json").find("\"config\"") != std::string::npos);

    // determinism: a second run writes identical bytes
    const auto data2 = dir / "data2";
    run_cli("synth " + kSynthFlags + " --out-dir '" + data2.string() + "'");
    for (const char* name : {"events.csv", "friendships.csv", "metadata.jsonl", "truth.json"})
        CHECK(slurp(data / name) == slurp(data2 / name));

    // ingest reads the stamped files back and canonicalizes them
    const auto ingested = dir / "ingested";
    const auto ingest =
        run_cli("ingest " + data_flags(data) + " --out-dir '" + ingested.string() + "'");
    REQUIRE(ingest.status == 0);
    CHECK(ingest.out.find("ingest:") != std::string::npos);
    CHECK(fs::exists(ingested / "events.csv"));

    // periodogram on a planted location
    const auto pgram_file = (dir / "pgram.csv").string();
    const auto pgram = run_cli("periodogram --events '" + (data / "events.csv").string() +
                               "' --location c0_loc0 --out '" + pgram_file + "'");
    REQUIRE(pgram.status == 0);
    const auto pgram_text = slurp(pgram_file);
    CHECK(pgram_text.find("k,power\n") != std::string::npos);
    CHECK(pgram_text.find("# dominant,") != std::string::npos);

    const auto bad_loc =
        run_cli("periodogram --events '" + (data / "events.csv").string() + "' --location nowhere");
    CHECK(bad_loc.status == 1);
    CHECK(bad_loc.err.find("unknown location 'nowhere'") != std::string::npos);

    // graph artifacts
    const auto graphs = dir / "graphs";
    const auto graph = run_cli("graph " + data_flags(data) + " --out-dir '" + graphs.string() + "'");
    REQUIRE(graph.status == 0);
    CHECK(slurp(graphs / "st_graph.csv").find("src,dst,weight\n") != std::string::npos);
    CHECK(slurp(graphs / "social_graph.csv").rfind("# config,", 0) == 0);

    // rwr scores: header plus one row per node, scores sum to 1
    const auto pi_file = (dir / "pi.csv").string();
    const auto rwr = run_cli("rwr --events '" + (data / "events.csv").string() +
                             "' --seed-thing c0_t00 --out '" + pi_file + "'");
    REQUIRE(rwr.status == 0);
    std::istringstream pi_in(slurp(pi_file));
    std::string line;
    double total = 0.0;
    std::size_t rows = 0;
    while (std::getline(pi_in, line)) {
        if (line.empty() || line[0] == '#' || line == "node,score") continue;
        total += discort::parse_double(line.substr(line.rfind(',') + 1));
        ++rows;
    }
    CHECK(rows == 4 + 24 + 6);  // locations + bins + things
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

    const auto bad_thing = run_cli("rwr --events '" + (data / "events.csv").string() +
                                   "' --seed-thing ghost");
    CHECK(bad_thing.status == 1);
    CHECK(bad_thing.err.find("unknown thing 'ghost'") != std::string::npos);

    const auto bad_graph = run_cli("rwr --events '" + (data / "events.csv").string() +
                                   "' --seed-thing c0_t00 --graph mesh");
    CHECK(bad_graph.status == 2);

    fs::remove_all(dir.parent_path());
}

TEST_CASE("pipeline bytes equal the subcommand sequence and ignore --jobs") {
    const auto dir = scratch_dir("pipeline");
    const auto data = dir / "data";
    REQUIRE(run_cli("synth " + kSynthFlags + " --out-dir '" + data.string() + "'").status == 0);

    const std::string shared =
        data_flags(data) + " " + kSynthFlags + " " + kEvalFlags;

    // stage by stage into A
    const auto a = (dir / "a").string();
    REQUIRE(run_cli("rgt " + shared + " --out-dir '" + a + "'").status == 0);
    REQUIRE(run_cli("features " + shared + " --out-dir '" + a + "'").status == 0);
    REQUIRE(run_cli("train " + shared + " --features '" + a + "/features.csv' --out-dir '" + a +
                    "'")
                .status == 0);
    REQUIRE(run_cli("eval " + shared + " --out-dir '" + a + "'").status == 0);

    // one shot into B
    const auto b = (dir / "b").string();
    REQUIRE(run_cli("pipeline " + shared + " --out-dir '" + b + "'").status == 0);

    for (const char* name : {"rgt.json", "features.csv", "model.txt", "report.csv"}) {
        CAPTURE(name);
        const auto a_bytes = slurp(fs::path(a) / name);
        CHECK(!a_bytes.empty());
        CHECK(a_bytes == slurp(fs::path(b) / name));
    }

    // --jobs must not change a single byte
    const auto c = (dir / "c").string();
    REQUIRE(run_cli("pipeline " + shared + " --jobs 4 --out-dir '" + c + "'").status == 0);
    for (const char* name : {"rgt.json", "features.csv", "model.txt", "report.csv"})
        CHECK(slurp(fs::path(b) / name) == slurp(fs::path(c) / name));

    // all four artifacts carry the same config hash
    const auto rgt_text = slurp(fs::path(b) / "rgt.json");
    const auto key = rgt_text.find("\"config\": \"");
    REQUIRE(key != std::string::npos);
    const auto hash = rgt_text.substr(key + 11, 16);
    CHECK(slurp(fs::path(b) / "features.csv").rfind("# config," + hash + "\n", 0) == 0);
    CHECK(slurp(fs::path(b) / "model.txt").find("# config," + hash) != std::string::npos);
    CHECK(slurp(fs::path(b) / "report.csv").rfind("# config," + hash + "\n", 0) == 0);

    // annotate consumes the artifacts and ranks labels for every thing
    const auto preds = run_cli("annotate --model '" + b + "/model.txt' --features '" + b +
                               "/features.csv' --top 1");
    REQUIRE(preds.status == 0);
    CHECK(preds.out.find("thing,rank,label,score\n") != std::string::npos);
    CHECK(line_count(preds.out) == 2 + 6);  // comment + header + one row per thing

    fs::remove_all(dir.parent_path());
}

TEST_CASE("config file keys equal flags, with CLI precedence") {
    const auto dir = scratch_dir("config");
    const auto data = dir / "data";
    REQUIRE(run_cli("synth " + kSynthFlags + " --out-dir '" + data.string() + "'").status == 0);

    // every tunable written to a file
    const auto cfg_path = dir / "run.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "# small planted run\n";
        cfg << "events=" << (data / "events.csv").string() << "\n";
        cfg << "friendships=" << (data / "friendships.csv").string() << "\n";
        cfg << "metadata=" << (data / "metadata.jsonl").string() << "\n";
        cfg << "n_clusters=2\nthings_per_cluster=3\nusers=4\ndays=20\nevents_per_day=40\n";
        cfg << "noise_rate=0\nseed=11\nfractions=0.34\nreps=2\nk=3\nk_eig=2\n";
    }

    const auto from_file = (dir / "from_file").string();
    REQUIRE(run_cli("rgt --config '" + cfg_path.string() + "' --out-dir '" + from_file + "'")
                .status == 0);
    const auto from_flags = (dir / "from_flags").string();
    REQUIRE(run_cli("rgt " + data_flags(data) + " " + kSynthFlags + " " + kEvalFlags +
                    " --k 3 --out-dir '" + from_flags + "'")
                .status == 0);
    CHECK(slurp(fs::path(from_file) / "rgt.json") == slurp(fs::path(from_flags) / "rgt.json"));

    // a CLI flag overrides the file value
    const auto overridden = (dir / "overridden").string();
    REQUIRE(run_cli("rgt --config '" + cfg_path.string() + "' --k 2 --out-dir '" + overridden +
                    "'")
                .status == 0);
    const auto base = (dir / "base").string();
    REQUIRE(run_cli("rgt " + data_flags(data) + " " + kSynthFlags + " " + kEvalFlags +
                    " --k 2 --out-dir '" + base + "'")
                .status == 0);
    CHECK(slurp(fs::path(overridden) / "rgt.json") == slurp(fs::path(base) / "rgt.json"));
    CHECK(slurp(fs::path(overridden) / "rgt.json") != slurp(fs::path(from_file) / "rgt.json"));

    // config file errors carry file and line, exit 2
    const auto bad_path = dir / "bad.cfg";
    {
        std::ofstream cfg(bad_path);
        cfg << "c=0.5\nwhatever=1\n";
    }
    const auto bad = run_cli("rgt --config '" + bad_path.string() + "'");
    CHECK(bad.status == 2);
    CHECK(bad.err.find(bad_path.string() + ":2: unknown key 'whatever'") != std::string::npos);

    fs::remove_all(dir.parent_path());
}
