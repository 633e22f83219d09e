#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ptk::scenario {

// Execution overrides supplied by the command line.
struct RunOptions {
    std::string out_dir = ".";
    std::optional<unsigned long> seed;  // overrides the scenario's seed
    std::optional<int> steps;           // overrides the scenario's step counts
    int threads = 0;                    // 0 = PTK_THREADS / hardware default
    std::string expected_kind;          // when set, the scenario kind must match
};

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 numerical failure, 2 validation failure
    std::string kind;
    std::vector<std::string> files;  // paths written under out_dir
    std::string message;
};

// Validates and executes a declarative scenario file.  Writes a results
// CSV/JSON and a run manifest into out_dir.  Never throws; failures are
// reported through the exit code and message.
RunResult run_file(const std::string& scenario_path, const RunOptions& opt = {});
RunResult run_text(const std::string& scenario_json, const RunOptions& opt = {});

}  // namespace ptk::scenario

namespace ptk::selftest {

struct TagResult {
    std::string tag;
    int cases = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct Options {
    std::vector<std::string> tags;  // empty selects every tag
    int cases = 50;
    unsigned long seed = 20260801;
    int threads = 0;
    bool inject_eg1_sign_flip = false;  // test fixture: forces the eg1 tag to fail
};

const std::vector<std::string>& all_tags();

// Oracle-equivalence suite: each tag compares one closed-form phase law
// against the quadrature/flow route it shortcuts.  Throws ValidationError on
// an unknown or explicitly empty tag selection.
std::vector<TagResult> run(const Options& opt = {});

}  // namespace ptk::selftest
