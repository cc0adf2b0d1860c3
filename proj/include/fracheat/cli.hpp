#pragma once

#include "fracheat/experiments.hpp"
#include "fracheat/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fracheat::cli {

enum class ValueType { Int, Real, Bool, Text };

struct KeySpec {
    std::string key;
    ValueType type;
    std::string default_value;
    std::string help;
};

/// Every configuration key with its type and documented default.
const std::vector<KeySpec>& schema();

/// Defaults that a subcommand layers over the global ones (empty for most).
std::map<std::string, std::string> command_defaults(std::string_view command);

/// Flat key = value configuration resolved in layers: defaults < command defaults
/// < file < flags. Every write is checked against the schema.
class Config {
public:
    static Config defaults(std::string_view command = "");

    /// Lines of `key = value`; '#' starts a comment. Throws UsageError naming the
    /// offending key (or line) on unknown keys and type mismatches.
    void merge_text(std::string_view text, std::string_view origin);
    void merge_file(const std::filesystem::path& path);
    void set(std::string_view key, std::string_view value, std::string_view origin);

    double real(std::string_view key) const;
    long integer(std::string_view key) const;
    bool flag(std::string_view key) const;
    const std::string& text(std::string_view key) const;
    std::vector<double> reals(std::string_view key) const;  // comma-separated list

    const std::map<std::string, std::string>& values() const noexcept { return values_; }
    /// Where each value came from ("default", a command name, a file path or "flag").
    const std::map<std::string, std::string>& origins() const noexcept { return origins_; }
    /// Sorted `key = value` lines; parsing the result reproduces the configuration.
    std::string render() const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> origins_;
};

spectral::Grid make_grid(const Config& cfg);
operators::FracParams frac_params(const Config& cfg);
norms::SpaceParams space_params(const Config& cfg);
solver::SolverConfig solver_config(const Config& cfg);
experiments::DataSpec data_spec(const Config& cfg);

/// FNV-1a, used for run-directory names and input fingerprints.
std::uint64_t fnv1a(std::string_view bytes);

/// Line plot with one polyline per numeric column after the first; log axes are
/// chosen when a column is positive and spans more than two decades.
std::string render_svg(const experiments::Table& table, const std::string& title);
experiments::Table read_csv(const std::filesystem::path& path);

/// Entry point of the `fracheat` executable. Returns 0 on success, 1 when a
/// verification fails and 2 on usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fracheat::cli
