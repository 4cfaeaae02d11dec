#include "ahfl/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>

#include "ahfl/errors.hpp"
#include "ahfl/io.hpp"

namespace ahfl {

bool operator==(const SystemConfig& a, const SystemConfig& b) {
  return a.run.topology == b.run.topology && a.run.timing == b.run.timing &&
         a.run.learning == b.run.learning && a.run.d == b.run.d &&
         a.run.dataset_size == b.run.dataset_size && a.run.T == b.run.T &&
         a.run.seed == b.run.seed && a.burn_in == b.burn_in;
}

ConfigEntries parse_entries(std::string_view text) {
  ConfigEntries entries;
  std::string section;
  int line_no = 0;
  for (const auto& raw : io::split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = io::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError("section", line_no, "malformed section header '" + std::string(line) + "'");
      }
      section = std::string(io::trim(line.substr(1, line.size() - 2)));
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(std::string(line), line_no, "expected 'key = value'");
    }
    std::string key(io::trim(line.substr(0, eq)));
    std::string value(io::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("<empty>", line_no, "missing key before '='");
    if (!section.empty()) key = section + "." + key;
    if (entries.contains(key)) {
      throw ParseError(key, line_no,
                       "duplicate key (first set on line " + std::to_string(entries[key].line) + ")");
    }
    entries.emplace(std::move(key), ConfigEntry{std::move(value), line_no});
  }
  return entries;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const ConfigEntry& entry) {
  T out{};
  const char* first = entry.value.data();
  const char* last = first + entry.value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(key, entry.line, "cannot parse '" + entry.value + "' as a number");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ParseError(key, entry.line, "value must be finite");
  }
  return out;
}

class Reader {
 public:
  Reader(const ConfigEntries& entries, const std::vector<std::string>& ignored)
      : entries_(entries) {
    for (const auto& [key, entry] : entries_) {
      const auto dot = key.find('.');
      const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
      bool skip = false;
      for (const auto& s : ignored) skip = skip || s == section;
      if (skip) continue;
      bool known = false;
      for (const auto& [k, v] : default_entries()) known = known || k == key;
      if (!known) throw ParseError(key, entry.line, "unknown configuration key");
    }
  }

  template <typename T>
  std::optional<T> get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return parse_number<T>(key, it->second);
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    return get<T>(key).value_or(fallback);
  }

 private:
  const ConfigEntries& entries_;
};

}  // namespace

std::vector<std::pair<std::string, std::string>> default_entries() {
  const SystemConfig d{};
  const RunConfig& r = d.run;
  auto f = [](double v) { return io::format_double(v); };
  return {
      {"topology.n", std::to_string(r.topology.n)},
      {"topology.e", std::to_string(r.topology.e)},
      {"topology.alpha", f(r.topology.alpha)},
      {"topology.beta", f(r.topology.beta)},
      {"topology.m", std::to_string(r.topology.m)},
      {"topology.k", std::to_string(r.topology.k)},
      {"timing.lambda", f(r.timing.lambda)},
      {"timing.c", f(r.timing.c)},
      {"timing.mu_tilde", f(r.timing.mu_tilde)},
      {"learning.d", std::to_string(r.d)},
      {"learning.dataset_size", std::to_string(r.dataset_size)},
      {"learning.rho", f(r.learning.rho)},
      {"learning.eta", f(r.learning.eta)},
      {"learning.t_tilde", std::to_string(r.learning.t_tilde)},
      {"learning.sigma_exponent", f(r.learning.sigma_exponent)},
      {"learning.batch", std::to_string(r.learning.batch)},
      {"run.T", std::to_string(r.T)},
      {"run.seed", std::to_string(r.seed)},
      {"run.burn_in", f(d.burn_in)},
  };
}

SystemConfig config_from_entries(const ConfigEntries& entries,
                                 const std::vector<std::string>& ignored_sections) {
  const Reader in(entries, ignored_sections);
  SystemConfig cfg;
  RunConfig& r = cfg.run;

  const int n = in.get_or<int>("topology.n", 100);
  const int e = in.get_or<int>("topology.e", 5);
  const double alpha = in.get_or<double>("topology.alpha", 0.5);
  const double beta = in.get_or<double>("topology.beta", 0.5);
  const auto m = in.get<int>("topology.m");
  const auto k = in.get<int>("topology.k");

  if (e < 1) throw ValidationError("topology.e", "must be a positive integer");
  if (n < 1) throw ValidationError("topology.n", "must be a positive integer");
  if (n % e != 0) throw ValidationError("topology.n", "must be divisible by topology.e");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("topology.alpha", "must lie in (0, 1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("topology.beta", "must lie in (0, 1]");

  r.topology.n = n;
  r.topology.e = e;
  r.topology.l = n / e;
  r.topology.alpha = alpha;
  r.topology.beta = beta;
  r.topology.m = m.value_or(std::max(1, static_cast<int>(std::lround(beta * r.topology.l))));
  r.topology.k = k.value_or(std::max(1, static_cast<int>(std::lround(alpha * r.topology.m))));

  r.timing.lambda = in.get_or<double>("timing.lambda", r.timing.lambda);
  r.timing.c = in.get_or<double>("timing.c", r.timing.c);
  r.timing.mu_tilde = in.get_or<double>("timing.mu_tilde", r.timing.mu_tilde);

  r.d = in.get_or<int>("learning.d", r.d);
  r.dataset_size = in.get_or<std::size_t>("learning.dataset_size", r.dataset_size);
  r.learning.rho = in.get_or<double>("learning.rho", r.learning.rho);
  r.learning.eta = in.get_or<double>("learning.eta", r.learning.eta);
  r.learning.t_tilde = in.get_or<int>("learning.t_tilde", r.learning.t_tilde);
  r.learning.sigma_exponent = in.get_or<double>("learning.sigma_exponent", r.learning.sigma_exponent);
  r.learning.batch = in.get_or<int>("learning.batch", r.learning.batch);

  r.T = in.get_or<std::int64_t>("run.T", r.T);
  r.seed = in.get_or<std::uint64_t>("run.seed", r.seed);
  cfg.burn_in = in.get_or<double>("run.burn_in", cfg.burn_in);

  r.validate();
  if (!(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0)) {
    throw ValidationError("run.burn_in", "must lie in [0, 1)");
  }
  return cfg;
}

SystemConfig parse_config(std::string_view text) { return config_from_entries(parse_entries(text)); }

SystemConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_file(path));
}

std::string write_config(const SystemConfig& cfg) {
  const RunConfig& r = cfg.run;
  auto f = [](double v) { return io::format_double(v); };
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };

  out += "[topology]\n";
  kv("n", std::to_string(r.topology.n));
  kv("e", std::to_string(r.topology.e));
  kv("alpha", f(r.topology.alpha));
  kv("beta", f(r.topology.beta));
  kv("m", std::to_string(r.topology.m));
  kv("k", std::to_string(r.topology.k));
  out += "\n[timing]\n";
  kv("lambda", f(r.timing.lambda));
  kv("c", f(r.timing.c));
  kv("mu_tilde", f(r.timing.mu_tilde));
  out += "\n[learning]\n";
  kv("d", std::to_string(r.d));
  kv("dataset_size", std::to_string(r.dataset_size));
  kv("rho", f(r.learning.rho));
  kv("eta", f(r.learning.eta));
  kv("t_tilde", std::to_string(r.learning.t_tilde));
  kv("sigma_exponent", f(r.learning.sigma_exponent));
  kv("batch", std::to_string(r.learning.batch));
  out += "\n[run]\n";
  kv("T", std::to_string(r.T));
  kv("seed", std::to_string(r.seed));
  kv("burn_in", f(cfg.burn_in));
  return out;
}

}  // namespace ahfl
