#include "distal/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

namespace distal {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end) throw std::invalid_argument("bad value for " + key + ": " + text);
  return value;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Index positive(const std::string& key, Index v) {
  if (v < 1) throw std::invalid_argument(key + " must be positive");
  return v;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::perturbation: return "perturbation";
    case Experiment::regression: return "regression";
    case Experiment::sequential: return "sequential";
    case Experiment::rehearsal: return "rehearsal";
  }
  return "unknown";
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "models") {
    auto names = split(value, ',');
    if (names.empty()) throw std::invalid_argument("models must not be empty");
    for (const auto& n : names)
      if (std::find(roster_names().begin(), roster_names().end(), n) == roster_names().end())
        throw std::invalid_argument("unknown model: " + n);
    models = names;
  } else if (key == "z") {
    z = positive(key, parse_value<Index>(key, value));
  } else if (key == "pairs") {
    pairs = positive(key, parse_value<Index>(key, value));
  } else if (key == "n_train") {
    n_train = positive(key, parse_value<Index>(key, value));
  } else if (key == "epochs") {
    epochs = static_cast<int>(positive(key, parse_value<int>(key, value)));
  } else if (key == "batch") {
    batch = positive(key, parse_value<Index>(key, value));
  } else if (key == "lr") {
    lr = parse_value<double>(key, value);
    if (!(lr > 0)) throw std::invalid_argument("lr must be positive");
  } else if (key == "partitions") {
    partitions = positive(key, parse_value<Index>(key, value));
    const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(partitions))));
    if (side * side != partitions) throw std::invalid_argument("partitions must be a perfect square");
  } else if (key == "points_per_partition") {
    points_per_partition = positive(key, parse_value<Index>(key, value));
  } else if (key == "rehearsal_points") {
    rehearsal_points = positive(key, parse_value<Index>(key, value));
  } else if (key == "n_test") {
    n_test = positive(key, parse_value<Index>(key, value));
  } else if (key == "resolution") {
    resolution = positive(key, parse_value<Index>(key, value));
  } else if (key == "trials") {
    trials = positive(key, parse_value<Index>(key, value));
  } else if (key == "mc_samples") {
    mc_samples = positive(key, parse_value<Index>(key, value));
  } else if (key == "deltas") {
    std::vector<double> ds;
    for (const auto& d : split(value, ',')) {
      ds.push_back(parse_value<double>(key, d));
      if (!(ds.back() > 0)) throw std::invalid_argument("deltas must be positive");
    }
    if (ds.empty()) throw std::invalid_argument("deltas must not be empty");
    deltas = ds;
  } else if (key == "seed") {
    master_seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "threads") {
    threads = static_cast<int>(positive(key, parse_value<int>(key, value)));
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
  if (std::find(overrides.begin(), overrides.end(), key) == overrides.end()) overrides.push_back(key);
}

void apply_config_file(ExperimentConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::string manifest(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto join = [](const auto& items, auto fmt) {
    std::string out;
    for (const auto& it : items) out += (out.empty() ? "" : ",") + fmt(it);
    return out;
  };
  os << "experiment=" << to_string(cfg.experiment) << '\n'
     << "models=" << join(cfg.models, [](const std::string& s) { return s; }) << '\n'
     << "z=" << cfg.z << '\n'
     << "pairs=" << cfg.pairs << '\n'
     << "n_train=" << cfg.n_train << '\n'
     << "epochs=" << cfg.epochs << '\n'
     << "batch=" << cfg.batch << '\n'
     << "lr=" << format_number(cfg.lr) << '\n'
     << "partitions=" << cfg.partitions << '\n'
     << "points_per_partition=" << cfg.points_per_partition << '\n'
     << "rehearsal_points=" << cfg.rehearsal_points << '\n'
     << "n_test=" << cfg.n_test << '\n'
     << "resolution=" << cfg.resolution << '\n'
     << "trials=" << cfg.trials << '\n'
     << "mc_samples=" << cfg.mc_samples << '\n'
     << "deltas=" << join(cfg.deltas, [](double d) { return format_number(d); }) << '\n'
     << "seed=" << cfg.master_seed << '\n'
     << "overrides=" << join(cfg.overrides, [](const std::string& s) { return s; }) << '\n';
  return os.str();
}

Architecture roster_architecture(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "wide_relu") return ReluArch{{2, 1000, 1}};
  if (name == "deep_relu") return ReluArch{{2, 16, 16, 16, 16, 16, 16, 16, 16, 1}};
  if (name == "abel") return AbelArch{2, cfg.z, cfg.pairs};
  if (name == "spline_ann") return SplineAnnArch{2, cfg.z};
  if (name == "lookup") return LookupArch{2, cfg.z};
  throw std::invalid_argument("unknown model: " + name);
}

InitSpec<double> roster_init(const std::string& name, std::uint64_t seed) {
  InitSpec<double> spec;
  spec.seed = seed;
  spec.kind = (name == "wide_relu" || name == "deep_relu") ? InitKind::glorot_uniform : InitKind::random_uniform;
  return spec;
}

Model make_roster_model(const std::string& name, const ExperimentConfig& cfg, std::uint64_t seed) {
  return init_model(roster_init(name, seed), roster_architecture(name, cfg));
}

}  // namespace distal
