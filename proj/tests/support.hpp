#pragma once

#include <annulus/cli.hpp>
#include <annulus/synth.hpp>

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

namespace fs = std::filesystem;

// Fresh scratch directory per test; left behind for inspection on failure.
inline fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("annulus_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CliResult {
    int code = 0;
    std::string out, err;
};

inline CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "annulus");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliResult r;
    r.code = annulus::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// Small default-shaped cohort.
inline annulus::SynthCohort cohort(int n_per_class, double noise_mm, std::uint64_t seed, bool pose = true) {
    auto a = annulus::default_no_mr_spec();
    auto b = annulus::default_mr_spec();
    for (auto* s : {&a, &b}) {
        s->n = n_per_class;
        s->noise_mm = noise_mm;
        s->random_pose = pose;
    }
    return annulus::generate_cohorts(a, b, seed);
}

// Data rows of a CSV (comment and header lines dropped), split on commas.
inline std::vector<std::vector<std::string>> csv_rows(const std::string& text, bool keep_header = false) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    bool header = true;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        if (header && !keep_header) {
            header = false;
            continue;
        }
        header = false;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(cells);
    }
    return rows;
}

} // namespace testing
