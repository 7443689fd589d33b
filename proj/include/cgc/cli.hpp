#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cgc/dalembert.hpp"
#include "cgc/io.hpp"

namespace cgc::cli {

enum ExitCode : int { Ok = 0, VerifyFailed = 1, UsageError = 2, RuntimeFailure = 3 };

struct Projection {
    enum class Kind { Mu, Sym, Scaled, Flat, Parallel, Ramp };
    Kind kind = Kind::Mu;
    double mu = 0.0;  ///< Mu, Scaled, Parallel; start of the ramp
    double r = 0.0;   ///< Parallel distance; end of the ramp
    std::string name() const;
};

struct RunConfig {
    std::string potential;   ///< builtin name
    std::string configPath;  ///< or a JSON potential document
    GridSpec grid;
    bool domainGiven = false;
    TruncationPolicy policy;
    std::vector<Projection> projections;
    std::string outDir = "cgc_out";
    MeshFormat format = MeshFormat::Obj;
    bool rawR4 = false;
};

/// Runs one subcommand (build, project, verify, sweep); args exclude the program name.
/// Returns an ExitCode. Messages go to out, errors to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "NxM" -> (N, M); "a,b,c,d" -> u and v ranges. Throw std::invalid_argument.
std::pair<int, int> parse_grid(const std::string& text);
std::pair<Interval, Interval> parse_domain(const std::string& text);

}  // namespace cgc::cli
