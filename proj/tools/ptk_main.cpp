// ptk — scenario-driven front end for the phase toolkit.
//
// Subcommands run a declarative JSON scenario (check, flow, transport, hj,
// ebk, weyl, invariance) or the bundled oracle-equivalence suite (selftest).

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ptk/errors.hpp"
#include "ptk/numerics.hpp"
#include "ptk/scenario.hpp"
#include "ptk/version.hpp"

namespace {

struct CommonArgs {
    std::string scenario_file;
    std::string out_dir = ".";
    std::optional<unsigned long> seed;
    std::optional<int> steps;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_file, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "Output directory (default: .)");
    cmd->add_option("--seed", args.seed, "Override the scenario seed");
    cmd->add_option("--steps", args.steps, "Override integrator step counts");
    cmd->add_option("--threads", args.threads, "Cap batch parallelism (see also PTK_THREADS)");
}

int run_scenario(const CommonArgs& args, const std::string& kind) {
    ptk::scenario::RunOptions opt;
    opt.out_dir = args.out_dir;
    opt.seed = args.seed;
    opt.steps = args.steps;
    opt.threads = args.threads;
    opt.expected_kind = kind;
    const ptk::scenario::RunResult result = ptk::scenario::run_file(args.scenario_file, opt);
    if (result.exit_code == 0) {
        std::printf("%s: %s\n", kind.c_str(), result.message.c_str());
        for (const auto& f : result.files) std::printf("wrote %s\n", f.c_str());
    } else {
        std::fprintf(stderr, "error: %s\n", result.message.c_str());
    }
    return result.exit_code;
}

int run_selftest(const std::string& tags_csv, bool tags_given, int cases, unsigned long seed,
                 int threads) {
    ptk::selftest::Options opt;
    opt.cases = cases;
    opt.seed = seed;
    opt.threads = threads;
    if (tags_given) {
        std::string token;
        for (char c : tags_csv + ",") {
            if (c == ',') {
                if (!token.empty()) opt.tags.push_back(token);
                token.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                token += c;
            }
        }
        if (opt.tags.empty()) {
            std::fprintf(stderr, "error: selftest: empty suite selection\n");
            return 2;
        }
    }
    std::vector<ptk::selftest::TagResult> results;
    try {
        results = ptk::selftest::run(opt);
    } catch (const ptk::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("tag %-4s : %s  max|err| = %s  (tol %s, %d cases)\n", r.tag.c_str(),
                    r.pass ? "PASS" : "FAIL", ptk::format_g17(r.max_error).c_str(),
                    ptk::format_g17(r.tolerance).c_str(), r.cases);
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase toolkit: Lagrangian-manifold phases under Hamiltonian flows"};
    app.set_version_flag("--version", ptk::version_string);
    app.require_subcommand(1);

    const std::vector<std::string> kinds = {"check", "flow",     "transport", "hj",
                                            "ebk",   "weyl",     "invariance"};
    std::vector<CommonArgs> args(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(kinds[i], "Run a '" + kinds[i] + "' scenario");
        add_common(cmd, args[i]);
    }

    std::string tags_csv;
    int st_cases = 50;
    unsigned long st_seed = 20260801;
    int st_threads = 0;
    CLI::App* st = app.add_subcommand("selftest", "Run the bundled oracle-equivalence suite");
    CLI::Option* tags_opt =
        st->add_option("--tags", tags_csv, "Comma-separated tag selection (default: all)");
    st->add_option("--cases", st_cases, "Randomized cases per tag (default: 50)");
    st->add_option("--seed", st_seed, "Randomization seed");
    st->add_option("--threads", st_threads, "Cap batch parallelism (see also PTK_THREADS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // CLI11 exits 0 for --help/--version; anything else is a usage error.
        return code == 0 ? 0 : 2;
    }

    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (app.get_subcommand(kinds[i])->parsed()) return run_scenario(args[i], kinds[i]);
    }
    if (st->parsed()) {
        return run_selftest(tags_csv, tags_opt->count() > 0, st_cases, st_seed, st_threads);
    }
    return 2;
}
