// SPDX-License-Identifier: Apache-2.0
#include "olaq/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "olaq/error.hpp"

namespace olaq {

void validate(const TrainConfig& c) {
  if (c.dims.size() < 2) throw ConfigError("dims needs at least two entries");
  for (std::size_t d : c.dims) {
    if (d == 0) throw ConfigError("every entry of dims must be positive");
  }
  if (c.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(c.learning_rate >= 0.0f) || !std::isfinite(c.learning_rate)) {
    throw ConfigError("learning_rate must be finite and non-negative");
  }
  if (!(c.test_fraction > 0.0) || !(c.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  validate(LayerConfig{c.mode, c.gamma});

  if (c.dataset == "synthetic") {
    const SynthSpec& s = c.synth;
    if (s.classes < 2) throw ConfigError("classes must be at least 2");
    if (c.dims.back() != s.classes) {
      throw ConfigError("the last entry of dims must equal the class count");
    }
    if (s.samples < 2 * s.classes) throw ConfigError("too few samples for the class count");
    if (!(s.noise >= 0.0f) || !std::isfinite(s.noise) || !std::isfinite(s.mean_shift)) {
      throw ConfigError("noise must be finite and non-negative");
    }
    if (s.injection.columns > c.dims.front()) {
      throw ConfigError("outlier_columns exceeds the feature count");
    }
    if (!std::isfinite(s.injection.scale)) throw ConfigError("outlier_scale must be finite");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid value \"" + text + "\" for " + key);
  }
  return value;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_number<std::size_t>(key, trim(item)));
  }
  return out;
}

}  // namespace

TrainConfig parse_config(std::istream& is) {
  TrainConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));

    if (key == "mode") c.mode = parse_layer_mode(value);
    else if (key == "gamma") c.gamma = parse_number<float>(key, value);
    else if (key == "dims") c.dims = parse_list(key, value);
    else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_number<float>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "dataset") c.dataset = value;
    else if (key == "classes") c.synth.classes = parse_number<std::size_t>(key, value);
    else if (key == "samples") c.synth.samples = parse_number<std::size_t>(key, value);
    else if (key == "mean_shift") c.synth.mean_shift = parse_number<float>(key, value);
    else if (key == "noise") c.synth.noise = parse_number<float>(key, value);
    else if (key == "outlier_columns") c.synth.injection.columns = parse_number<std::size_t>(key, value);
    else if (key == "outlier_scale") c.synth.injection.scale = parse_number<float>(key, value);
    else if (key == "test_fraction") c.test_fraction = parse_number<double>(key, value);
    else if (key == "workers") c.workers = parse_number<unsigned>(key, value);
    else if (key == "output") c.output = value;
    else throw ConfigError("line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
  }
  c.synth.features = c.dims.empty() ? 0 : c.dims.front();
  c.synth.seed = c.seed;
  validate(c);
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  return parse_config(is);
}

std::string to_text(const TrainConfig& c) {
  std::ostringstream os;
  os << std::setprecision(9);
  os << "mode = " << to_string(c.mode) << '\n'
     << "gamma = " << c.gamma << '\n'
     << "dims = ";
  for (std::size_t i = 0; i < c.dims.size(); ++i) os << (i ? ", " : "") << c.dims[i];
  os << '\n'
     << "epochs = " << c.epochs << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "learning_rate = " << c.learning_rate << '\n'
     << "seed = " << c.seed << '\n'
     << "dataset = " << c.dataset << '\n'
     << "classes = " << c.synth.classes << '\n'
     << "samples = " << c.synth.samples << '\n'
     << "mean_shift = " << c.synth.mean_shift << '\n'
     << "noise = " << c.synth.noise << '\n'
     << "outlier_columns = " << c.synth.injection.columns << '\n'
     << "outlier_scale = " << c.synth.injection.scale << '\n'
     << "test_fraction = " << c.test_fraction << '\n'
     << "workers = " << c.workers << '\n';
  if (!c.output.empty()) os << "output = " << c.output << '\n';
  return os.str();
}

}  // namespace olaq
