// Acceptance run: one PASS/FAIL line per criterion, exit 1 when any fails.
// Usage: acceptance <artifact_dir>

#include "stablesde/checks.hpp"
#include "stablesde/parallel.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <sys/wait.h>
#include <string>

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            std::ifstream in(entry.path(), std::ios::binary);
            files[fs::relative(entry.path(), root).string()] =
                std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        }
    }
    return files;
}

int run_selftest_cli(const fs::path& out, unsigned threads, const fs::path& log) {
    std::ostringstream cmd;
    cmd << '"' << STABLESDE_CLI_PATH << "\" selftest --seed " << kSeed << " --threads " << threads << " --out \""
        << out.string() << "\" > \"" << log.string() << "\" 2>&1";
    const int status = std::system(cmd.str().c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_artifacts");
    fs::remove_all(root);
    fs::create_directories(root);
    const unsigned threads = stablesde::default_thread_count();

    stablesde::checks::SuiteOptions options;
    options.seed = kSeed;
    options.threads = threads;
    std::map<int, double> limits;
    for (const auto& entry : stablesde::checks::suite()) {
        limits[entry.id] = entry.time_limit_seconds;
    }

    bool all = true;
    stablesde::checks::run_selftest(root / "suite", options,
                                    [&](const stablesde::checks::CheckResult& r, double seconds) {
                                        const double limit = limits[r.id];
                                        const bool in_time = seconds < limit;
                                        const bool ok = r.passed && in_time;
                                        all = all && ok;
                                        std::printf("criterion %d %-18s %s  [%.1f s, limit %.0f s%s]  %s\n", r.id,
                                                    r.name.c_str(), ok ? "PASS" : "FAIL", seconds, limit,
                                                    in_time ? "" : ", over time", r.summary.c_str());
                                        std::fflush(stdout);
                                    });

    // Two CLI selftest runs with the same config must produce identical files. Both
    // write to the same --out path, since the manifest echoes it.
    const auto start = std::chrono::steady_clock::now();
    const fs::path shared = root / "selftest";
    const int code_a = run_selftest_cli(shared, threads, root / "selftest_a.log");
    if (fs::exists(shared)) {
        fs::rename(shared, root / "selftest_a");
    }
    const int code_b = run_selftest_cli(shared, threads, root / "selftest_b.log");
    if (fs::exists(shared)) {
        fs::rename(shared, root / "selftest_b");
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string verdict;
    bool identical = false;
    if (fs::exists(root / "selftest_a") && fs::exists(root / "selftest_b")) {
        const auto a = read_tree(root / "selftest_a");
        const auto b = read_tree(root / "selftest_b");
        identical = !a.empty() && a == b;
        std::size_t differing = 0;
        for (const auto& [name, content] : a) {
            const auto it = b.find(name);
            differing += it == b.end() || it->second != content ? 1 : 0;
        }
        verdict = std::to_string(a.size()) + " artifacts, " + std::to_string(differing) + " differ" +
                  (a.size() == b.size() ? "" : ", file sets differ");
    } else {
        verdict = "selftest produced no artifacts";
    }
    verdict += " (selftest exit codes " + std::to_string(code_a) + ", " + std::to_string(code_b) + ")";
    all = all && identical;
    std::printf("criterion 9 %-18s %s  [%.1f s for two runs]  %s\n", "reproducibility", identical ? "PASS" : "FAIL",
                seconds, verdict.c_str());

    std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
    return all ? 0 : 1;
}
