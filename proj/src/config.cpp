#include "tts/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

namespace tts {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

[[noreturn]] void fail_line(int line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

[[noreturn]] void fail_key(const std::string& path, const std::string& message) {
  throw ConfigError("config key '" + path + "': " + message);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

double parse_double(const std::string& token, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    fail_key(path, "'" + token + "' is not a number");
  }
  return v;
}

long parse_long(const std::string& token, const std::string& path) {
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0') {
    fail_key(path, "'" + token + "' is not an integer");
  }
  return v;
}

// Typed access over the raw layer with consumption tracking: every key must
// be read exactly once by the validator, anything left over is unknown.
class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {
    for (std::size_t si = 0; si < raw.sections.size(); ++si) {
      const auto& section = raw.sections[si];
      if (!index_.emplace(section.name, si).second) {
        fail_line(section.line, "duplicate section [" + section.name + "]");
      }
      std::set<std::string> seen;
      for (const auto& entry : section.entries) {
        if (!seen.insert(entry.key).second) {
          fail_line(entry.line, "duplicate key '" + entry.key + "'");
        }
      }
    }
  }

  bool has_section(const std::string& name) const { return index_.count(name) > 0; }

  bool has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
  }

  std::string require(const std::string& section, const std::string& key) {
    const RawConfig::Entry* entry = find(section, key);
    if (entry == nullptr) {
      throw ConfigError("config: missing required key '" + section + "." + key + "'");
    }
    consumed_.insert(section + "." + key);
    return entry->value;
  }

  std::optional<std::string> optional(const std::string& section, const std::string& key) {
    const RawConfig::Entry* entry = find(section, key);
    if (entry == nullptr) return std::nullopt;
    consumed_.insert(section + "." + key);
    return entry->value;
  }

  double require_double(const std::string& section, const std::string& key) {
    return parse_double(require(section, key), section + "." + key);
  }

  long require_long(const std::string& section, const std::string& key) {
    return parse_long(require(section, key), section + "." + key);
  }

  Vector require_vector(const std::string& section, const std::string& key) {
    const std::string path = section + "." + key;
    const auto tokens = split_ws(require(section, key));
    if (tokens.empty()) fail_key(path, "empty vector");
    Vector v(static_cast<Eigen::Index>(tokens.size()));
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = parse_double(tokens[i], path);
    }
    return v;
  }

  Matrix require_matrix(const std::string& section, const std::string& key) {
    const std::string path = section + "." + key;
    const std::string value = require(section, key);
    std::vector<std::vector<double>> rows;
    std::size_t begin = 0;
    while (begin <= value.size()) {
      const std::size_t semi = value.find(';', begin);
      const std::string row_text =
          value.substr(begin, semi == std::string::npos ? std::string::npos : semi - begin);
      const auto tokens = split_ws(row_text);
      if (tokens.empty()) fail_key(path, "empty matrix row");
      std::vector<double> row;
      row.reserve(tokens.size());
      for (const auto& t : tokens) row.push_back(parse_double(t, path));
      if (!rows.empty() && rows.front().size() != row.size()) {
        fail_key(path, "matrix rows have unequal lengths");
      }
      rows.push_back(std::move(row));
      if (semi == std::string::npos) break;
      begin = semi + 1;
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    return m;
  }

  void mark_section_known(const std::string& name) { known_sections_.insert(name); }

  // Rejects unknown sections and keys after validation has consumed
  // everything it understands.
  void finish() const {
    for (const auto& section : raw_.sections) {
      if (known_sections_.count(section.name) == 0) {
        fail_line(section.line, "unknown section [" + section.name + "]");
      }
      for (const auto& entry : section.entries) {
        if (consumed_.count(section.name + "." + entry.key) == 0) {
          fail_key(section.name + "." + entry.key, "unknown key");
        }
      }
    }
  }

 private:
  const RawConfig::Entry* find(const std::string& section, const std::string& key) const {
    const auto it = index_.find(section);
    if (it == index_.end()) return nullptr;
    for (const auto& entry : raw_.sections[it->second].entries) {
      if (entry.key == key) return &entry;
    }
    return nullptr;
  }

  const RawConfig& raw_;
  std::map<std::string, std::size_t> index_;
  std::set<std::string> consumed_;
  std::set<std::string> known_sections_;
};

ChainSpec read_chain(Reader& reader) {
  reader.mark_section_known("chain");
  Matrix p = reader.require_matrix("chain", "p");
  std::vector<std::string> labels;
  if (auto raw_labels = reader.optional("chain", "labels")) {
    labels = split_ws(*raw_labels);
  }
  try {
    return ChainSpec(std::move(p), std::move(labels));
  } catch (const std::invalid_argument& e) {
    fail_key("chain.p", e.what());
  }
}

TwoTimeScaleProblem read_problem(Reader& reader) {
  ChainSpec chain = read_chain(reader);
  reader.mark_section_known("problem");
  const long dy = reader.require_long("problem", "dy");
  const long dx = reader.require_long("problem", "dx");
  if (dy < 1 || dx < 1) fail_key("problem.dy", "dimensions must be positive");

  std::vector<StateData> data;
  data.reserve(static_cast<std::size_t>(chain.size()));
  for (int o = 1; o <= chain.size(); ++o) {
    const std::string suffix = "_" + std::to_string(o);
    StateData sd;
    sd.a11 = reader.require_matrix("problem", "a11" + suffix);
    sd.a12 = reader.require_matrix("problem", "a12" + suffix);
    sd.a21 = reader.require_matrix("problem", "a21" + suffix);
    sd.a22 = reader.require_matrix("problem", "a22" + suffix);
    sd.b1 = reader.require_vector("problem", "b1" + suffix);
    sd.b2 = reader.require_vector("problem", "b2" + suffix);
    data.push_back(std::move(sd));
  }
  try {
    return TwoTimeScaleProblem(std::move(chain), std::move(data));
  } catch (const std::invalid_argument& e) {
    fail_key("problem", e.what());
  }
}

StepSchedule read_schedule(Reader& reader) {
  reader.mark_section_known("schedule");
  try {
    return StepSchedule(reader.require_double("schedule", "alpha"),
                        reader.require_double("schedule", "beta"),
                        reader.require_double("schedule", "xi"),
                        reader.require_double("schedule", "k0"));
  } catch (const std::invalid_argument& e) {
    fail_key("schedule", e.what());
  }
}

ExperimentConfig::SimulationSection read_simulation(Reader& reader) {
  reader.mark_section_known("simulation");
  ExperimentConfig::SimulationSection sim;

  if (auto mode = reader.optional("simulation", "mode")) {
    if (*mode == "two-timescale") {
      sim.mode = SimulationMode::TwoTimescale;
    } else if (*mode == "single") {
      sim.mode = SimulationMode::SingleTimescale;
    } else if (*mode == "polyak") {
      sim.mode = SimulationMode::Polyak;
    } else {
      fail_key("simulation.mode", "expected two-timescale, single, or polyak");
    }
  }
  if (auto kappa = reader.optional("simulation", "kappa")) {
    sim.kappa = parse_double(*kappa, "simulation.kappa");
    if (!(sim.kappa > 0.0)) fail_key("simulation.kappa", "must be positive");
  }
  sim.paths = reader.require_long("simulation", "paths");
  if (sim.paths < 1) fail_key("simulation.paths", "must be >= 1");
  sim.horizon = reader.require_long("simulation", "horizon");
  if (sim.horizon < 0) fail_key("simulation.horizon", "must be nonnegative");

  const std::string checkpoints = reader.optional("simulation", "checkpoints").value_or("log");
  if (checkpoints == "log") {
    int per_decade = 20;
    if (auto ppd = reader.optional("simulation", "points_per_decade")) {
      per_decade = static_cast<int>(parse_long(*ppd, "simulation.points_per_decade"));
      if (per_decade < 1) fail_key("simulation.points_per_decade", "must be >= 1");
    }
    sim.checkpoints = log_checkpoints(std::max<long>(sim.horizon, 1), per_decade);
  } else {
    const auto tokens = split_ws(checkpoints);
    if (tokens.empty() || tokens.front() != "list") {
      fail_key("simulation.checkpoints", "expected 'log' or 'list k1 k2 ...'");
    }
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      sim.checkpoints.push_back(parse_long(tokens[i], "simulation.checkpoints"));
    }
    if (sim.checkpoints.empty()) fail_key("simulation.checkpoints", "empty list");
  }

  const std::string seed_text = reader.require("simulation", "seed");
  char* end = nullptr;
  sim.seed = std::strtoull(seed_text.c_str(), &end, 10);
  if (end == seed_text.c_str() || *end != '\0') {
    fail_key("simulation.seed", "'" + seed_text + "' is not a 64-bit integer");
  }

  const auto init_tokens = split_ws(reader.optional("simulation", "init").value_or("zero"));
  if (init_tokens.empty()) fail_key("simulation.init", "empty");
  if (init_tokens.front() == "zero") {
    sim.init = InitPolicy::zero();
  } else if (init_tokens.front() == "uniform") {
    if (init_tokens.size() != 3) {
      fail_key("simulation.init", "expected 'uniform LO HI'");
    }
    const double lo = parse_double(init_tokens[1], "simulation.init");
    const double hi = parse_double(init_tokens[2], "simulation.init");
    if (!(lo < hi)) fail_key("simulation.init", "need LO < HI");
    sim.init = InitPolicy::uniform_box(lo, hi);
  } else if (init_tokens.front() == "fixed") {
    sim.init = InitPolicy::fixed(reader.require_vector("simulation", "init_y"),
                                 reader.require_vector("simulation", "init_x"));
  } else {
    fail_key("simulation.init", "expected zero, uniform LO HI, or fixed");
  }

  const auto start_tokens =
      split_ws(reader.optional("simulation", "chain_start").value_or("stationary"));
  if (start_tokens.size() == 1 && start_tokens.front() == "stationary") {
    sim.start = ChainStart::stationary();
  } else if (start_tokens.size() == 2 && start_tokens.front() == "fixed") {
    sim.start = ChainStart::fixed(
        static_cast<int>(parse_long(start_tokens[1], "simulation.chain_start")) - 1);
  } else {
    fail_key("simulation.chain_start", "expected 'stationary' or 'fixed STATE'");
  }
  return sim;
}

ExperimentConfig::RlSection read_rl(Reader& reader) {
  reader.mark_section_known("mdp");
  reader.mark_section_known("features");
  reader.mark_section_known("policies");
  reader.mark_section_known("rl");

  const long n_states = reader.require_long("mdp", "states");
  const long n_actions = reader.require_long("mdp", "actions");
  if (n_states < 1 || n_actions < 1) fail_key("mdp.states", "must be positive");
  const double gamma = reader.require_double("mdp", "gamma");

  std::vector<Matrix> transitions;
  for (long a = 1; a <= n_actions; ++a) {
    Matrix p = reader.require_matrix("mdp", "p_" + std::to_string(a));
    if (p.rows() != n_states || p.cols() != n_states) {
      fail_key("mdp.p_" + std::to_string(a), "must be states x states");
    }
    transitions.push_back(std::move(p));
  }
  Matrix rewards = reader.require_matrix("mdp", "r");
  if (rewards.rows() != n_states || rewards.cols() != n_actions) {
    fail_key("mdp.r", "must be states x actions");
  }

  ExperimentConfig::RlSection rl;
  try {
    rl.mdp = MDPSpec(std::move(transitions), std::move(rewards), gamma);
    rl.features = FeatureMap(reader.require_matrix("features", "phi"));
    rl.policies = PolicyPair(reader.require_matrix("policies", "behavior"),
                             reader.require_matrix("policies", "target"));
  } catch (const std::invalid_argument& e) {
    fail_key("mdp", e.what());
  }
  if (rl.features.phi.rows() != n_states) {
    fail_key("features.phi", "one feature row per state required");
  }
  if (rl.policies.behavior.rows() != n_states ||
      rl.policies.behavior.cols() != n_actions) {
    fail_key("policies.behavior", "must be states x actions");
  }

  const std::string name = reader.require("rl", "algorithm");
  if (name == "gtd") {
    rl.algorithm = Algorithm::Gtd;
  } else if (name == "gtd2") {
    rl.algorithm = Algorithm::Gtd2;
  } else if (name == "tdc") {
    rl.algorithm = Algorithm::Tdc;
  } else {
    fail_key("rl.algorithm", "expected gtd, gtd2, or tdc");
  }
  return rl;
}

}  // namespace

RawConfig RawConfig::parse(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  Section* current = nullptr;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;

    if (content.front() == '[') {
      if (content.back() != ']' || content.size() < 3) {
        fail_line(line_no, "malformed section header");
      }
      const std::string name = trim(content.substr(1, content.size() - 2));
      if (name.empty()) fail_line(line_no, "empty section name");
      raw.sections.push_back({name, {}, line_no});
      current = &raw.sections.back();
      continue;
    }

    const std::size_t eq = content.find('=');
    if (eq == std::string::npos) {
      fail_line(line_no, "expected 'key = value' or '[section]'");
    }
    if (current == nullptr) {
      fail_line(line_no, "key-value pair before any section header");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (key.empty()) fail_line(line_no, "empty key");
    if (value.empty()) fail_line(line_no, "empty value for key '" + key + "'");
    current->entries.push_back({key, value, line_no});
  }
  return raw;
}

std::string RawConfig::serialize() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out << '\n';
    out << '[' << sections[i].name << "]\n";
    for (const auto& entry : sections[i].entries) {
      out << entry.key << " = " << entry.value << '\n';
    }
  }
  return out.str();
}

ExperimentConfig parse_config(const std::string& text) {
  const RawConfig raw = RawConfig::parse(text);
  Reader reader(raw);
  ExperimentConfig config;

  const bool has_problem = reader.has_section("problem") || reader.has_section("chain");
  const bool has_rl = reader.has_section("mdp");
  if (has_problem && has_rl) {
    throw ConfigError("config: give either [chain]+[problem] or [mdp]+..., not both");
  }
  if (has_problem) {
    if (!reader.has_section("chain")) {
      throw ConfigError("config: missing section [chain]");
    }
    if (!reader.has_section("problem")) {
      throw ConfigError("config: missing section [problem]");
    }
    config.problem = read_problem(reader);
  }
  if (has_rl) {
    for (const char* name : {"features", "policies", "rl"}) {
      if (!reader.has_section(name)) {
        throw ConfigError(std::string("config: missing section [") + name + "]");
      }
    }
    config.rl = read_rl(reader);
  }

  if (reader.has_section("blocks")) {
    reader.mark_section_known("blocks");
    BlockSystem blocks;
    blocks.a11 = reader.require_matrix("blocks", "a11");
    blocks.a12 = reader.require_matrix("blocks", "a12");
    blocks.a21 = reader.require_matrix("blocks", "a21");
    blocks.a22 = reader.require_matrix("blocks", "a22");
    config.blocks = std::move(blocks);
    if (auto grid = reader.optional("blocks", "kappa_grid")) {
      for (const auto& token : split_ws(*grid)) {
        config.kappa_grid.push_back(parse_double(token, "blocks.kappa_grid"));
      }
    }
  }

  if (reader.has_section("schedule")) {
    config.schedule = read_schedule(reader);
  }
  if (reader.has_section("simulation")) {
    config.simulation = read_simulation(reader);
    if (config.simulation->horizon > 0) {
      for (long c : config.simulation->checkpoints) {
        if (c > config.simulation->horizon) {
          fail_key("simulation.checkpoints", "checkpoint beyond horizon");
        }
      }
    }
  }
  if (reader.has_section("output")) {
    reader.mark_section_known("output");
    ExperimentConfig::OutputSection out;
    out.path = reader.require("output", "path");
    if (auto precision = reader.optional("output", "precision")) {
      out.precision = static_cast<int>(parse_long(*precision, "output.precision"));
      if (out.precision < 1 || out.precision > 17) {
        fail_key("output.precision", "must be in [1, 17]");
      }
    }
    config.output = std::move(out);
  }
  if (reader.has_section("sweep")) {
    reader.mark_section_known("sweep");
    ExperimentConfig::SweepSection sweep;
    sweep.parameter = reader.require("sweep", "parameter");
    if (sweep.parameter != "xi" && sweep.parameter != "beta") {
      fail_key("sweep.parameter", "expected xi or beta");
    }
    for (const auto& token : split_ws(reader.require("sweep", "values"))) {
      sweep.values.push_back(parse_double(token, "sweep.values"));
    }
    if (sweep.values.empty()) fail_key("sweep.values", "empty list");
    config.sweep = std::move(sweep);
  }

  reader.finish();
  return config;
}

}  // namespace tts
