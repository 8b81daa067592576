#include "agd/workbench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace agd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

std::optional<long long> parse_int(const std::string& s) {
    long long v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

std::optional<Cell> parse_cell(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) return std::nullopt;
    auto r = parse_int(s.substr(0, comma));
    auto c = parse_int(s.substr(comma + 1));
    if (!r || !c) return std::nullopt;
    return Cell{static_cast<int>(*r), static_cast<int>(*c)};
}

const std::set<std::string> kSections = {"grid", "walls", "goals", "init", "params", "sensors", "decoys"};

class Parser {
public:
    Parser(bool strict, std::vector<std::string>* warnings) : strict_(strict), warnings_(warnings) {}

    Scenario run(std::istream& in) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_;
            auto text = raw.substr(0, raw.find('#'));
            text = trim(text);
            if (text.empty()) continue;
            if (text.front() == '[') {
                open_section(text);
                continue;
            }
            if (section_.empty()) {
                error("content before the first section");
                continue;
            }
            if (section_ == "?") continue;
            if (section_ == "grid" || section_ == "params") {
                key_value(text);
            } else if (section_ == "walls") {
                cells(text, sc_.walls, "wall ");
            } else if (section_ == "sensors") {
                cells(text, *sc_.sensors, "sensor cell ");
            } else if (section_ == "decoys") {
                cells(text, *sc_.decoys, "decoy cell ");
            } else if (section_ == "goals") {
                goal(text);
            } else if (section_ == "init") {
                initial(text);
            }
        }
        if (!seen_.count("grid")) issues_.push_back({0, "missing [grid] section"});
        if (issues_.empty())
            for (auto& issue : validate_scenario(sc_)) {
                // attribute the issue to the line of the longest matching subject
                std::size_t best = 0;
                for (const auto& [subject, line] : origin_)
                    if (issue.message.rfind(subject + " ", 0) == 0 && subject.size() > best) {
                        best = subject.size();
                        issue.line = line;
                    }
                issues_.push_back(std::move(issue));
            }
        return sc_;
    }

    std::vector<ScenarioIssue> issues_;

private:
    void error(const std::string& msg) { issues_.push_back({line_, msg}); }

    void unknown(const std::string& msg) {
        if (strict_) {
            error(msg);
        } else if (warnings_) {
            warnings_->push_back("line " + std::to_string(line_) + ": " + msg + " (ignored)");
        }
    }

    void open_section(const std::string& text) {
        if (text.back() != ']') {
            error("malformed section header '" + text + "'");
            section_ = "?";
            return;
        }
        const auto name = trim(text.substr(1, text.size() - 2));
        if (!kSections.count(name)) {
            unknown("unknown section [" + name + "]");
            section_ = "?";
            return;
        }
        if (!seen_.insert(name).second) error("duplicate section [" + name + "]");
        if (name == "init") {
            origin_.emplace("initial probabilities", line_);
            origin_.emplace("initial distribution", line_);
        }
        if (name == "sensors" && !sc_.sensors) sc_.sensors.emplace();
        if (name == "decoys" && !sc_.decoys) sc_.decoys.emplace();
        section_ = name;
    }

    void cells(const std::string& text, std::vector<Cell>& out, const std::string& subject) {
        for (const auto& tok : split_ws(text)) {
            if (auto c = parse_cell(tok)) {
                origin_.emplace(subject + cell_name(*c), line_);
                out.push_back(*c);
            } else {
                error("expected row,col but found '" + tok + "'");
            }
        }
    }

    void goal(const std::string& text) {
        const auto toks = split_ws(text);
        auto cell = parse_cell(toks.front());
        if (!cell) {
            error("expected row,col but found '" + toks.front() + "'");
            return;
        }
        GoalSpec g;
        g.cell = *cell;
        bool have_rewards = false;
        for (std::size_t i = 1; i < toks.size(); ++i) {
            const auto eq = toks[i].find('=');
            if (eq == std::string::npos) {
                error("expected key=value but found '" + toks[i] + "'");
                continue;
            }
            const auto key = toks[i].substr(0, eq);
            const auto value = toks[i].substr(eq + 1);
            if (key == "name") {
                g.name = value;
            } else if (key == "rewards") {
                have_rewards = true;
                std::istringstream parts(value);
                for (std::string part; std::getline(parts, part, ',');) {
                    if (auto v = parse_double(part)) {
                        g.rewards.push_back(*v);
                    } else {
                        error("invalid reward '" + part + "'");
                    }
                }
            } else if (key == "cost") {
                if (auto v = parse_double(value)) {
                    g.cost = *v;
                } else {
                    error("invalid cost '" + value + "'");
                }
            } else {
                unknown("unknown goal key '" + key + "'");
            }
        }
        if (!have_rewards) error("goal " + cell_name(g.cell) + " has no rewards");
        origin_.emplace("goal " + cell_name(g.cell), line_);
        sc_.goals.push_back(std::move(g));
    }

    void initial(const std::string& text) {
        const auto toks = split_ws(text);
        auto cell = parse_cell(toks.front());
        if (toks.size() != 2 || !cell) {
            error("expected 'row,col probability'");
            return;
        }
        auto p = parse_double(toks[1]);
        if (!p) {
            error("invalid probability '" + toks[1] + "'");
            return;
        }
        origin_.emplace("initial cell " + cell_name(*cell), line_);
        origin_.emplace("initial probability of " + cell_name(*cell), line_);
        sc_.initial.push_back({*cell, *p});
    }

    void key_value(const std::string& text) {
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            error("expected key = value");
            return;
        }
        const auto key = trim(text.substr(0, eq));
        const auto value = trim(text.substr(eq + 1));
        if (!keys_.insert(section_ + "." + key).second) {
            error("duplicate key '" + key + "'");
            return;
        }
        origin_.emplace(key, line_);
        auto number = [&]() -> std::optional<double> {
            auto v = parse_double(value);
            if (!v) error("invalid number for '" + key + "': '" + value + "'");
            return v;
        };
        auto count = [&]() -> std::optional<long long> {
            auto v = parse_int(value);
            if (!v || *v < 0) {
                error("'" + key + "' must be a non-negative integer");
                return std::nullopt;
            }
            return v;
        };
        if (section_ == "grid") {
            if (key == "rows") {
                if (auto v = count()) sc_.rows = static_cast<int>(*v);
            } else if (key == "cols") {
                if (auto v = count()) sc_.cols = static_cast<int>(*v);
            } else {
                unknown("unknown grid key '" + key + "'");
            }
            return;
        }
        if (key == "name") {
            sc_.name = value;
        } else if (key == "slip") {
            if (auto v = number()) sc_.slip = *v;
        } else if (key == "discount") {
            if (auto v = number()) sc_.discount = *v;
        } else if (key == "sensor_budget") {
            if (auto v = count()) sc_.sensor_budget = static_cast<std::size_t>(*v);
        } else if (key == "decoy_budget") {
            if (auto v = number()) sc_.decoy_budget = *v;
        } else if (key == "types") {
            if (auto v = count()) sc_.types = static_cast<std::size_t>(*v);
        } else {
            unknown("unknown parameter '" + key + "'");
        }
    }

    bool strict_;
    std::vector<std::string>* warnings_;
    Scenario sc_;
    std::size_t line_ = 0;
    std::string section_;
    std::set<std::string> seen_;
    std::set<std::string> keys_;
    /// Maps a validation subject to the line that introduced it.
    std::map<std::string, std::size_t> origin_;
};

bool in_bounds(const Scenario& sc, Cell c) { return c.row >= 0 && c.col >= 0 && c.row < sc.rows && c.col < sc.cols; }

std::string fmt(double v) { return format_number(v); }

}  // namespace

std::string cell_name(Cell c) { return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")"; }

std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

ScenarioError::ScenarioError(std::string source, std::vector<ScenarioIssue> issues)
    : std::runtime_error([&] {
          std::string msg = "invalid scenario " + source + ":";
          for (const auto& i : issues)
              msg += "\n  " + (i.line ? "line " + std::to_string(i.line) + ": " : std::string()) + i.message;
          return msg;
      }()),
      issues_(std::move(issues)) {}

std::vector<ScenarioIssue> validate_scenario(const Scenario& sc) {
    std::vector<ScenarioIssue> out;
    auto issue = [&](const std::string& msg) { out.push_back({0, msg}); };
    if (sc.rows < 1) issue("rows must be at least 1");
    if (sc.cols < 1) issue("cols must be at least 1");
    if (!out.empty()) return out;

    std::set<Cell> walls;
    for (Cell c : sc.walls) {
        if (!in_bounds(sc, c)) issue("wall " + cell_name(c) + " is outside the grid");
        if (!walls.insert(c).second) issue("wall " + cell_name(c) + " listed twice");
    }
    auto open = [&](Cell c) { return in_bounds(sc, c) && !walls.count(c); };

    if (sc.types < 1) issue("types must be at least 1");
    std::set<Cell> goals;
    for (const auto& g : sc.goals) {
        const auto subject = "goal " + cell_name(g.cell);
        if (!open(g.cell)) issue(subject + " must be an open cell");
        if (!goals.insert(g.cell).second) issue(subject + " listed twice");
        if (g.rewards.size() != sc.types)
            issue(subject + " has " + std::to_string(g.rewards.size()) + " rewards for " + std::to_string(sc.types) +
                  " attacker types");
        for (double r : g.rewards)
            if (!std::isfinite(r)) issue(subject + " has a non-finite reward");
        if (!std::isfinite(g.cost)) issue(subject + " has a non-finite cost");
    }

    if (sc.initial.empty()) issue("initial distribution is empty");
    std::set<Cell> starts;
    double total = 0.0;
    for (const auto& e : sc.initial) {
        if (!open(e.cell)) issue("initial cell " + cell_name(e.cell) + " must be an open cell");
        if (!starts.insert(e.cell).second) issue("initial cell " + cell_name(e.cell) + " listed twice");
        if (!(e.prob >= 0.0 && e.prob <= 1.0)) issue("initial probability of " + cell_name(e.cell) + " outside [0,1]");
        total += e.prob;
    }
    if (!sc.initial.empty() && std::abs(total - 1.0) > 1e-9)
        issue("initial probabilities sum to " + fmt(total) + ", not 1");

    if (!(sc.slip >= 0.0 && sc.slip < 0.5)) issue("slip must lie in [0, 0.5)");
    if (!(sc.discount > 0.0 && sc.discount <= 1.0)) issue("discount must lie in (0, 1]");
    if (!(sc.decoy_budget >= 0.0) || !std::isfinite(sc.decoy_budget)) issue("decoy_budget must be finite and >= 0");

    auto check_set = [&](const std::optional<std::vector<Cell>>& cells, const std::string& what) {
        if (!cells) return;
        std::set<Cell> seen;
        for (Cell c : *cells) {
            if (!open(c)) issue(what + " cell " + cell_name(c) + " must be an open cell");
            if (goals.count(c)) issue(what + " cell " + cell_name(c) + " is a goal");
            if (!seen.insert(c).second) issue(what + " cell " + cell_name(c) + " listed twice");
        }
    };
    check_set(sc.sensors, "sensor");
    check_set(sc.decoys, "decoy");
    return out;
}

Scenario parse_scenario(std::istream& in, const std::string& source, bool strict, std::vector<std::string>* warnings) {
    Parser parser(strict, warnings);
    auto sc = parser.run(in);
    if (!parser.issues_.empty()) throw ScenarioError(source, std::move(parser.issues_));
    return sc;
}

Scenario load_scenario(const std::string& path, bool strict, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path, {{0, "cannot open file"}});
    return parse_scenario(in, path, strict, warnings);
}

std::string serialize_scenario(const Scenario& sc) {
    std::ostringstream out;
    auto cell = [](Cell c) { return std::to_string(c.row) + "," + std::to_string(c.col); };
    out << "[grid]\nrows = " << sc.rows << "\ncols = " << sc.cols << "\n\n[walls]\n";
    for (Cell c : sc.walls) out << cell(c) << "\n";
    out << "\n[goals]\n";
    for (const auto& g : sc.goals) {
        out << cell(g.cell);
        if (!g.name.empty()) out << " name=" << g.name;
        out << " rewards=";
        for (std::size_t i = 0; i < g.rewards.size(); ++i) out << (i ? "," : "") << fmt(g.rewards[i]);
        out << " cost=" << fmt(g.cost) << "\n";
    }
    out << "\n[init]\n";
    for (const auto& e : sc.initial) out << cell(e.cell) << " " << fmt(e.prob) << "\n";
    out << "\n[params]\n";
    if (!sc.name.empty()) out << "name = " << sc.name << "\n";
    out << "types = " << sc.types << "\nslip = " << fmt(sc.slip) << "\ndiscount = " << fmt(sc.discount)
        << "\nsensor_budget = " << sc.sensor_budget << "\ndecoy_budget = " << fmt(sc.decoy_budget) << "\n";
    if (sc.sensors) {
        out << "\n[sensors]\n";
        for (Cell c : *sc.sensors) out << cell(c) << "\n";
    }
    if (sc.decoys) {
        out << "\n[decoys]\n";
        for (Cell c : *sc.decoys) out << cell(c) << "\n";
    }
    return out.str();
}

std::string scenario_digest(const Scenario& sc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_scenario(sc)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace agd
