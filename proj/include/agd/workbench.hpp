#pragma once

#include "agd/mdp.hpp"
#include "agd/robust.hpp"

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agd {

struct Cell {
    int row = 0;
    int col = 0;

    auto operator<=>(const Cell&) const = default;
};

/// "(r,c)".
std::string cell_name(Cell c);

struct GoalSpec {
    Cell cell;
    std::string name;
    /// One reward per attacker type.
    std::vector<double> rewards;
    /// Defender cost when the attacker reaches the goal.
    double cost = 0.0;

    bool operator==(const GoalSpec&) const = default;
};

struct InitialEntry {
    Cell cell;
    double prob = 0.0;

    bool operator==(const InitialEntry&) const = default;
};

struct Scenario {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::vector<Cell> walls;
    std::vector<GoalSpec> goals;
    std::vector<InitialEntry> initial;
    double slip = 0.1;
    double discount = 0.95;
    std::size_t sensor_budget = 0;
    double decoy_budget = 0.0;
    std::size_t types = 1;
    /// Monitorable cells U. Absent means every open cell that is neither a
    /// goal nor an initial cell.
    std::optional<std::vector<Cell>> sensors;
    /// Decoy candidate cells D. Absent means none.
    std::optional<std::vector<Cell>> decoys;

    bool operator==(const Scenario&) const = default;
};

struct ScenarioIssue {
    /// 1-based source line, 0 when the issue is not tied to a line.
    std::size_t line = 0;
    std::string message;
};

class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string source, std::vector<ScenarioIssue> issues);
    const std::vector<ScenarioIssue>& issues() const { return issues_; }

private:
    std::vector<ScenarioIssue> issues_;
};

/// Every invariant violation of a parsed scenario.
std::vector<ScenarioIssue> validate_scenario(const Scenario& sc);

/// Parses the line-oriented scenario grammar (docs/scenario_format.md) and
/// validates the result. All problems are collected and thrown together as
/// a ScenarioError. In strict mode unknown sections and keys are errors;
/// otherwise they are skipped and reported through `warnings`.
Scenario parse_scenario(std::istream& in, const std::string& source = "<input>", bool strict = true,
                        std::vector<std::string>* warnings = nullptr);
Scenario load_scenario(const std::string& path, bool strict = true, std::vector<std::string>* warnings = nullptr);

/// Canonical text form. parse_scenario(serialize_scenario(sc)) == sc.
std::string serialize_scenario(const Scenario& sc);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string scenario_digest(const Scenario& sc);

struct Gridworld {
    AttackerTypeSet types;
    /// Defender cost table (positive at goals).
    RewardTable cost;
    /// Cell of each state except the sink, which is the last state.
    std::vector<Cell> cells;

    std::optional<StateId> state_of(Cell c) const;
    /// Throws std::invalid_argument for cells that are not open.
    SensorAllocation allocation(const std::vector<Cell>& placed) const;
    std::vector<Cell> cells_of(const std::vector<StateId>& states) const;
};

/// Actions N, E, S, W. The intended move happens with probability 1 - 2α
/// and each lateral move with α. Moves into walls or off the grid stay put.
/// Goals pay the type's reward and move to the sink.
Gridworld build_gridworld(const Scenario& sc);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t episodes = 0;
};

/// Average ν-weighted discounted return over `episodes` sampled episodes of
/// at most `horizon` steps. Episode i draws from its own generator seeded
/// from (seed, i), so results do not depend on the thread count.
MonteCarloEstimate monte_carlo_value(const AttackMdp& mdp, const Policy& policy, std::size_t episodes,
                                     std::size_t horizon, std::uint64_t seed,
                                     const RewardTable* reward_override = nullptr, unsigned threads = 0);

/// Flat key-value run record. Keys keep insertion order; setting an
/// existing key replaces its value in place.
class RunReport {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set_int(const std::string& key, long long value);
    void set(const std::string& key, const std::vector<double>& values);

    std::optional<std::string> get(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    /// One `key=value` line per entry; newlines in values are escaped.
    void write_record(std::ostream& out) const;
    static RunReport read_record(std::istream& in);

    /// Aligned two-column table for terminals.
    void write_table(std::ostream& out) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Round-trip decimal form used in records.
std::string format_number(double v);

inline constexpr int kExitOptimal = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitGap = 2;

struct CliResult {
    int exit_code = kExitError;
    RunReport report;
};

/// Parses `args` (without the program name), runs one subcommand, prints
/// the table to `out` and writes the record to --output when given.
CliResult run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agd
