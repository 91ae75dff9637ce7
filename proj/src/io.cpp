// Strict JSON configuration parsing with a canonical inverse rendering, the
// W2DS little-endian snapshot format, 17-significant-digit CSV / plotdata
// emission, and SHA-256 digested run manifests. Parse errors name the
// offending key by its full path; file-surface errors throw IoError so the
// command line can map them to a distinct exit code.
#include "smag/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <utility>

#include "json.hpp"

namespace smag {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string join_path(const std::string& scope, const std::string& key) {
  return scope.empty() ? key : scope + "." + key;
}

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: '" + path + "' " + what);
}

void reject_unknown_keys(const ordered_json& obj, const std::string& scope,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("config: unknown key '" + join_path(scope, item.key()) + "'");
    }
  }
}

double get_number(const ordered_json& obj, const std::string& scope, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) bad_key(join_path(scope, key), "must be a number");
  return v.get<double>();
}

double get_positive(const ordered_json& obj, const std::string& scope, const char* key,
                    double fallback) {
  const double x = get_number(obj, scope, key, fallback);
  if (!(x > 0.0)) bad_key(join_path(scope, key), "must be a positive number");
  return x;
}

double get_nonnegative(const ordered_json& obj, const std::string& scope, const char* key,
                       double fallback) {
  const double x = get_number(obj, scope, key, fallback);
  if (!(x >= 0.0)) bad_key(join_path(scope, key), "must be a nonnegative number");
  return x;
}

long long get_integer(const ordered_json& obj, const std::string& scope, const char* key,
                      long long fallback, std::optional<long long> min_value = std::nullopt) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) bad_key(join_path(scope, key), "must be an integer");
  const long long x = v.get<long long>();
  if (min_value && x < *min_value) {
    bad_key(join_path(scope, key), "must be an integer >= " + std::to_string(*min_value));
  }
  return x;
}

std::uint64_t get_seed(const ordered_json& obj, const char* key) {
  if (!obj.contains(key)) return 0;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    bad_key(key, "must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const ordered_json& obj, const std::string& scope, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) bad_key(join_path(scope, key), "must be a string");
  return v.get<std::string>();
}

Scheme parse_scheme(const std::string& name) {
  if (name == "deterministic") return Scheme::deterministic;
  if (name == "ito") return Scheme::ito_em;
  if (name == "stratonovich") return Scheme::stratonovich_heun;
  bad_key("scheme", "must be \"deterministic\", \"ito\", or \"stratonovich\"");
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::deterministic: return "deterministic";
    case Scheme::ito_em: return "ito";
    case Scheme::stratonovich_heun: return "stratonovich";
  }
  return "deterministic";
}

ModelSpec parse_model(const ordered_json& root) {
  ModelSpec spec;
  if (!root.contains("model")) return spec;
  const auto& mj = root.at("model");
  if (!mj.is_object()) bad_key("model", "must be an object");
  const std::string type = get_string(mj, "model", "type", "smagorinsky");
  if (type == "smagorinsky") {
    reject_unknown_keys(mj, "model", {"type", "cs_delta"});
    spec.kind = ModelSpec::Kind::smagorinsky;
    spec.cs_delta = get_positive(mj, "model", "cs_delta", 0.05);
  } else if (type == "linear") {
    reject_unknown_keys(mj, "model", {"type", "c"});
    spec.kind = ModelSpec::Kind::linear;
    spec.c = get_number(mj, "model", "c", 0.0);
  } else {
    bad_key("model.type", "must be \"smagorinsky\" or \"linear\"");
  }
  return spec;
}

LESModel build_model(const ModelSpec& spec) {
  return spec.kind == ModelSpec::Kind::smagorinsky ? LESModel::smagorinsky(spec.cs_delta)
                                                   : LESModel::linear(spec.c);
}

IcSpec parse_ic(const ordered_json& root) {
  IcSpec ic;
  if (!root.contains("ic")) return ic;
  const auto& ij = root.at("ic");
  if (!ij.is_object()) bad_key("ic", "must be an object");
  const std::string type = get_string(ij, "ic", "type", "random_band");
  if (type == "random_band") {
    reject_unknown_keys(ij, "ic", {"type", "band", "amplitude"});
    ic.kind = IcSpec::Kind::random_band;
    ic.band = static_cast<int>(get_integer(ij, "ic", "band", 4, 1));
    ic.amplitude = get_positive(ij, "ic", "amplitude", 1.0);
  } else if (type == "single_mode") {
    reject_unknown_keys(ij, "ic", {"type", "l1", "l2", "amplitude"});
    ic.kind = IcSpec::Kind::single_mode;
    ic.l1 = static_cast<int>(get_integer(ij, "ic", "l1", 1));
    ic.l2 = static_cast<int>(get_integer(ij, "ic", "l2", 1));
    ic.amplitude = get_number(ij, "ic", "amplitude", 1.0);
  } else if (type == "snapshot") {
    reject_unknown_keys(ij, "ic", {"type", "path"});
    ic.kind = IcSpec::Kind::snapshot;
    if (!ij.contains("path")) bad_key("ic.path", "is required when ic.type is \"snapshot\"");
    ic.path = get_string(ij, "ic", "path", "");
  } else {
    bad_key("ic.type", "must be \"random_band\", \"single_mode\", or \"snapshot\"");
  }
  return ic;
}

// {"shell": N} or {"entries": [[k1, k2, theta], ...]}; exactly one form.
NoiseSpec parse_noise(const ordered_json& nj, std::optional<NoiseCoefficients>* theta_out) {
  if (!nj.is_object()) bad_key("noise", "must be an object");
  reject_unknown_keys(nj, "noise", {"shell", "entries"});
  if (nj.contains("shell") == nj.contains("entries")) {
    bad_key("noise", "must contain exactly one of \"shell\" or \"entries\"");
  }
  NoiseSpec spec;
  if (nj.contains("shell")) {
    spec.kind = NoiseSpec::Kind::shell;
    spec.shell_n = static_cast<int>(get_integer(nj, "noise", "shell", 2, 1));
    spec.entries.clear();
    return spec;
  }
  const auto& ej = nj.at("entries");
  if (!ej.is_array() || ej.empty()) bad_key("noise.entries", "must be a nonempty array");
  spec.kind = NoiseSpec::Kind::entries;
  for (const auto& rec : ej) {
    if (!rec.is_array() || rec.size() != 3 || !rec[0].is_number_integer() ||
        !rec[1].is_number_integer() || !rec[2].is_number()) {
      bad_key("noise.entries", "records must be [k1, k2, theta] with integer k and numeric theta");
    }
    spec.entries.push_back(ThetaEntry{rec[0].get<int>(), rec[1].get<int>(), rec[2].get<double>()});
  }
  try {
    *theta_out = NoiseCoefficients::from_entries(spec.entries);
  } catch (const std::invalid_argument& e) {
    bad_key("noise.entries", std::string("is invalid: ") + e.what());
  }
  return spec;
}

ordered_json model_json(const ModelSpec& spec) {
  ordered_json mj;
  if (spec.kind == ModelSpec::Kind::smagorinsky) {
    mj["type"] = "smagorinsky";
    mj["cs_delta"] = spec.cs_delta;
  } else {
    mj["type"] = "linear";
    mj["c"] = spec.c;
  }
  return mj;
}

ordered_json ic_json(const IcSpec& ic) {
  ordered_json ij;
  switch (ic.kind) {
    case IcSpec::Kind::random_band:
      ij["type"] = "random_band";
      ij["band"] = ic.band;
      ij["amplitude"] = ic.amplitude;
      break;
    case IcSpec::Kind::single_mode:
      ij["type"] = "single_mode";
      ij["l1"] = ic.l1;
      ij["l2"] = ic.l2;
      ij["amplitude"] = ic.amplitude;
      break;
    case IcSpec::Kind::snapshot:
      ij["type"] = "snapshot";
      ij["path"] = ic.path;
      break;
  }
  return ij;
}

ordered_json noise_json(const NoiseSpec& spec) {
  ordered_json nj;
  if (spec.kind == NoiseSpec::Kind::shell) {
    nj["shell"] = spec.shell_n;
  } else {
    ordered_json entries = ordered_json::array();
    for (const ThetaEntry& e : spec.entries) {
      entries.push_back(ordered_json::array({e.k1, e.k2, e.value}));
    }
    nj["entries"] = std::move(entries);
  }
  return nj;
}

// --- binary primitives, all little-endian ------------------------------------

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i32(std::string& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void need_bytes(const std::string& data, std::size_t pos, std::size_t n) {
  if (pos + n > data.size()) {
    throw IoError("read_snapshot: truncated file, expected " + std::to_string(pos + n) +
                  " bytes but only " + std::to_string(data.size()) + " are present");
  }
}

std::uint32_t get_u32(const std::string& data, std::size_t& pos) {
  need_bytes(data, pos, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
  }
  pos += 4;
  return v;
}

std::uint64_t get_u64(const std::string& data, std::size_t& pos) {
  need_bytes(data, pos, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
  }
  pos += 8;
  return v;
}

std::int32_t get_i32(const std::string& data, std::size_t& pos) {
  return static_cast<std::int32_t>(get_u32(data, pos));
}

double get_f64(const std::string& data, std::size_t& pos) {
  return std::bit_cast<double>(get_u64(data, pos));
}

constexpr std::uint32_t kSnapshotVersion = 1;

// --- text emission -------------------------------------------------------------

std::string fmt17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_text(const std::string& path, const char* who) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(std::string(who) + ": cannot open '" + path + "' for writing");
  return out;
}

void finish_text(std::ofstream& out, const std::string& path, const char* who) {
  out.flush();
  if (!out) throw IoError(std::string(who) + ": short write to '" + path + "'");
}

std::string mode_column(int l1, int l2) {
  return "m_" + std::to_string(l1) + "_" + std::to_string(l2);
}

}  // namespace

// --- initial conditions ----------------------------------------------------------

SpectralField build_initial_condition(const IcSpec& ic, const GridSpec& grid,
                                      std::uint64_t master_seed) {
  switch (ic.kind) {
    case IcSpec::Kind::random_band:
      return random_band_field(grid, ic.band, ic.amplitude, master_seed);
    case IcSpec::Kind::single_mode: {
      if (!grid.contains(ic.l1, ic.l2)) {
        throw std::invalid_argument(
            "ic: single mode (" + std::to_string(ic.l1) + ", " + std::to_string(ic.l2) +
            ") is outside the retained mask (the zero mode is excluded)");
      }
      SpectralField w(grid);
      w.set_coeff(ic.l1, ic.l2, ic.amplitude);
      return w;
    }
    case IcSpec::Kind::snapshot: {
      SpectralField w = read_snapshot(ic.path);
      if (!(w.grid() == grid)) {
        throw std::invalid_argument("ic: snapshot grid (" + std::to_string(w.grid().n) +
                                    ") does not match the configured grid (" +
                                    std::to_string(grid.n) + ")");
      }
      return w;
    }
  }
  throw std::invalid_argument("ic: unknown initial-condition kind");
}

// --- config parsing ---------------------------------------------------------------

ParsedConfig parse_config(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");

  ParsedConfig pc;
  pc.kind = j.contains("shells") ? ParsedConfig::Kind::scaling : ParsedConfig::Kind::solver;

  SolverConfig base;
  const long long n = get_integer(j, "", "grid", 64, 4);
  base.grid = GridSpec::square_of(static_cast<int>(n));
  base.nu = get_nonnegative(j, "", "nu", 0.01);
  base.dt = get_positive(j, "", "dt", 1e-3);
  base.horizon = get_positive(j, "", "T", 0.25);
  base.record_stride = static_cast<int>(get_integer(j, "", "record_stride", 25, 1));
  base.enstrophy_guard = get_number(j, "", "enstrophy_guard", 2.0);
  if (!(base.enstrophy_guard > 1.0)) bad_key("enstrophy_guard", "must be greater than 1");
  pc.model = parse_model(j);
  base.model = build_model(pc.model);
  pc.ic = parse_ic(j);
  pc.master_seed = get_seed(j, "seed");

  if (pc.kind == ParsedConfig::Kind::solver) {
    reject_unknown_keys(j, "",
                        {"grid", "nu", "dt", "T", "scheme", "model", "noise", "ic",
                         "record_stride", "enstrophy_guard", "seed", "dt_list", "paths"});
    base.scheme = parse_scheme(get_string(j, "", "scheme", "deterministic"));
    const bool stochastic = base.scheme != Scheme::deterministic;
    if (j.contains("noise")) {
      if (!stochastic) {
        throw std::invalid_argument(
            "config: 'noise' requires a stochastic scheme, but 'scheme' is \"deterministic\"");
      }
      pc.noise = parse_noise(j.at("noise"), &base.theta);
      if (pc.noise.kind == NoiseSpec::Kind::shell) {
        try {
          base.theta = NoiseCoefficients::shell(pc.noise.shell_n, base.grid);
        } catch (const std::invalid_argument& e) {
          bad_key("noise.shell", std::string("is invalid: ") + e.what());
        }
      }
    } else if (stochastic) {
      pc.noise.kind = NoiseSpec::Kind::shell;
      pc.noise.shell_n = 2;
      try {
        base.theta = NoiseCoefficients::shell(2, base.grid);
      } catch (const std::invalid_argument& e) {
        bad_key("grid", std::string("cannot resolve the default shell-2 noise: ") + e.what());
      }
    }
    pc.solver = base;
    pc.solver.validate();

    if (j.contains("dt_list")) {
      const auto& dj = j.at("dt_list");
      if (!dj.is_array() || dj.empty()) bad_key("dt_list", "must be a nonempty array of numbers");
      pc.dt_list.clear();
      for (const auto& v : dj) {
        if (!v.is_number() || !(v.get<double>() > 0.0)) {
          bad_key("dt_list", "must contain only positive numbers");
        }
        pc.dt_list.push_back(v.get<double>());
      }
      for (std::size_t i = 1; i < pc.dt_list.size(); ++i) {
        if (!(pc.dt_list[i] < pc.dt_list[i - 1])) {
          bad_key("dt_list", "must be strictly decreasing");
        }
      }
    }
    pc.paths = static_cast<int>(get_integer(j, "", "paths", 8, 1));
    return pc;
  }

  // Scaling study: the noise family is chosen per shell, so an explicit
  // "noise" key is rejected before the generic unknown-key sweep.
  if (j.contains("noise")) {
    throw std::invalid_argument(
        "config: 'noise' is not accepted in a scaling study; the modulation family is chosen "
        "per entry of 'shells'");
  }
  reject_unknown_keys(j, "",
                      {"grid", "nu", "dt", "T", "scheme", "model", "ic", "record_stride",
                       "enstrophy_guard", "seed", "shells", "paths_per_shell", "delta"});
  base.scheme = parse_scheme(get_string(j, "", "scheme", "ito"));
  if (base.scheme == Scheme::deterministic) {
    bad_key("scheme", "must be \"ito\" or \"stratonovich\" in a scaling study");
  }

  ScalingStudySpec spec;
  const auto& sj = j.at("shells");
  if (!sj.is_array() || sj.empty()) bad_key("shells", "must be a nonempty array of integers");
  for (const auto& v : sj) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      bad_key("shells", "must contain only integers >= 1");
    }
    spec.shells.push_back(v.get<int>());
  }
  for (int shell_n : spec.shells) {
    try {
      NoiseCoefficients::shell(shell_n, base.grid);
    } catch (const std::invalid_argument& e) {
      bad_key("shells", "entry " + std::to_string(shell_n) + " is invalid: " + e.what());
    }
  }
  spec.paths_per_shell = static_cast<int>(get_integer(j, "", "paths_per_shell", 16, 1));
  spec.delta = get_number(j, "", "delta", 1.0);
  if (!(spec.delta > 0.0) || !(spec.delta <= 2.0)) bad_key("delta", "must lie in (0, 2]");

  base.theta = NoiseCoefficients::shell(spec.shells.front(), base.grid);
  spec.base = base;
  spec.reference = base;
  spec.reference.scheme = Scheme::deterministic;
  spec.reference.theta.reset();
  spec.validate();
  pc.scaling = std::move(spec);
  pc.noise.kind = NoiseSpec::Kind::none;
  return pc;
}

std::string render_config(const ParsedConfig& config) {
  const bool scaling = config.kind == ParsedConfig::Kind::scaling;
  const SolverConfig& base = scaling ? config.scaling.base : config.solver;
  ordered_json j;
  j["grid"] = base.grid.n;
  j["nu"] = base.nu;
  j["dt"] = base.dt;
  j["T"] = base.horizon;
  j["scheme"] = scheme_name(base.scheme);
  j["model"] = model_json(config.model);
  if (!scaling && config.noise.kind != NoiseSpec::Kind::none) {
    j["noise"] = noise_json(config.noise);
  }
  j["ic"] = ic_json(config.ic);
  j["record_stride"] = base.record_stride;
  j["enstrophy_guard"] = base.enstrophy_guard;
  j["seed"] = config.master_seed;
  if (scaling) {
    j["shells"] = config.scaling.shells;
    j["paths_per_shell"] = config.scaling.paths_per_shell;
    j["delta"] = config.scaling.delta;
  } else {
    j["dt_list"] = config.dt_list;
    j["paths"] = config.paths;
  }
  return j.dump(2) + "\n";
}

// --- snapshots -----------------------------------------------------------------

void write_snapshot(const SpectralField& field, const std::string& path) {
  std::string buf;
  buf += "W2DS";
  put_u32(buf, kSnapshotVersion);
  put_u32(buf, static_cast<std::uint32_t>(field.grid().n));
  put_u32(buf, static_cast<std::uint32_t>(field.grid().max_mode));
  std::uint64_t count = 0;
  field.for_each([&](int, int, double c) {
    if (c != 0.0) ++count;
  });
  put_u64(buf, count);
  field.for_each([&](int l1, int l2, double c) {
    if (c == 0.0) return;
    put_i32(buf, l1);
    put_i32(buf, l2);
    put_f64(buf, c);
  });

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_snapshot: cannot open '" + path + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw IoError("write_snapshot: short write to '" + path + "'");
}

SpectralField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_snapshot: cannot open '" + path + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read_snapshot: read failure on '" + path + "'");

  std::size_t pos = 0;
  need_bytes(data, pos, 4);
  if (data.compare(0, 4, "W2DS") != 0) {
    throw IoError("read_snapshot: bad magic, '" + path + "' is not a W2DS snapshot");
  }
  pos += 4;
  const std::uint32_t version = get_u32(data, pos);
  if (version != kSnapshotVersion) {
    throw IoError("read_snapshot: unsupported version " + std::to_string(version) +
                  " (expected " + std::to_string(kSnapshotVersion) + ")");
  }
  GridSpec grid;
  grid.n = static_cast<int>(get_u32(data, pos));
  grid.max_mode = static_cast<int>(get_u32(data, pos));
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("read_snapshot: invalid grid header: ") + e.what());
  }
  const std::uint64_t count = get_u64(data, pos);

  SpectralField field(grid);
  const int side = grid.side();
  std::vector<char> seen(static_cast<std::size_t>(side) * side, 0);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::int32_t l1 = get_i32(data, pos);
    const std::int32_t l2 = get_i32(data, pos);
    const double c = get_f64(data, pos);
    if (l1 == 0 && l2 == 0) {
      throw IoError("read_snapshot: coefficient at l = 0 violates the zero-mean invariant");
    }
    if (!grid.contains(l1, l2)) {
      throw IoError("read_snapshot: mode (" + std::to_string(l1) + ", " + std::to_string(l2) +
                    ") lies outside the retained mask");
    }
    const std::size_t slot = static_cast<std::size_t>(l1 + grid.max_mode) * side +
                             static_cast<std::size_t>(l2 + grid.max_mode);
    if (seen[slot]) {
      throw IoError("read_snapshot: duplicate record for mode (" + std::to_string(l1) + ", " +
                    std::to_string(l2) + ")");
    }
    seen[slot] = 1;
    field.set_coeff(l1, l2, c);
  }
  if (pos != data.size()) {
    throw IoError("read_snapshot: " + std::to_string(data.size() - pos) +
                  " trailing bytes after the last record");
  }
  return field;
}

// --- reports -------------------------------------------------------------------

void write_run_record_csv(const RunRecord& rec, const std::string& path) {
  std::ofstream out = open_text(path, "write_run_record_csv");
  out << "time,l2_norm,h1_seminorm,dissipation_acc,grad_sq_integral";
  for (const auto& mode : kTrackedModes) out << ',' << mode_column(mode[0], mode[1]);
  out << '\n';
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    out << fmt17(rec.times[i]) << ',' << fmt17(rec.l2_norms[i]) << ','
        << fmt17(rec.h1_seminorms[i]) << ',' << fmt17(rec.dissipation_acc[i]) << ','
        << fmt17(rec.grad_sq_integral[i]);
    for (double c : rec.mode_track[i]) out << ',' << fmt17(c);
    out << '\n';
  }
  finish_text(out, path, "write_run_record_csv");
}

void write_convergence_csv(const ConvergenceTable& table, const std::string& path) {
  std::ofstream out = open_text(path, "write_convergence_csv");
  out << "N,linf_theta,mean_dist_Hm1,std_dist,mean_dist_L2H1m,paths,seconds\n";
  for (const ConvergenceRow& row : table.rows) {
    out << row.shell_n << ',' << fmt17(row.theta_linf) << ',' << fmt17(row.mean_sup_hm) << ','
        << fmt17(row.std_sup_hm) << ',' << fmt17(row.mean_l2h) << ',' << row.paths << ','
        << fmt17(row.seconds) << '\n';
  }
  finish_text(out, path, "write_convergence_csv");
}

void write_consistency_csv(const ConsistencyTable& table, const std::string& path) {
  std::ofstream out = open_text(path, "write_consistency_csv");
  out << "dt,mean_sup_l2,std_sup_l2,paths\n";
  for (const ConsistencyRow& row : table.rows) {
    out << fmt17(row.dt) << ',' << fmt17(row.mean_sup_l2) << ',' << fmt17(row.std_sup_l2) << ','
        << row.paths << '\n';
  }
  finish_text(out, path, "write_consistency_csv");
}

std::vector<std::string> write_run_record_plotdata(const RunRecord& rec, const std::string& dir,
                                                   const std::string& stem) {
  std::vector<std::pair<std::string, const std::vector<double>*>> series = {
      {"l2_norm", &rec.l2_norms},
      {"h1_seminorm", &rec.h1_seminorms},
      {"dissipation_acc", &rec.dissipation_acc},
      {"grad_sq_integral", &rec.grad_sq_integral},
  };
  std::vector<std::string> written;
  for (const auto& [name, values] : series) {
    const std::string path = dir + "/" + stem + "_" + name + ".dat";
    std::ofstream out = open_text(path, "write_run_record_plotdata");
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      out << fmt17(rec.times[i]) << ' ' << fmt17((*values)[i]) << '\n';
    }
    finish_text(out, path, "write_run_record_plotdata");
    written.push_back(path);
  }
  for (std::size_t m = 0; m < kTrackedModes.size(); ++m) {
    const std::string path =
        dir + "/" + stem + "_" + mode_column(kTrackedModes[m][0], kTrackedModes[m][1]) + ".dat";
    std::ofstream out = open_text(path, "write_run_record_plotdata");
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      out << fmt17(rec.times[i]) << ' ' << fmt17(rec.mode_track[i][m]) << '\n';
    }
    finish_text(out, path, "write_run_record_plotdata");
    written.push_back(path);
  }
  return written;
}

// --- manifests -----------------------------------------------------------------

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("sha256_file: cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256_file: digest initialization failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0 && EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount())) != 1) {
      EVP_MD_CTX_free(ctx);
      throw IoError("sha256_file: digest update failed");
    }
  }
  if (in.bad()) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256_file: read failure on '" + path + "'");
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256_file: digest finalization failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string digest;
  digest.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    digest.push_back(hex[md[i] >> 4]);
    digest.push_back(hex[md[i] & 0xf]);
  }
  return digest;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
  ordered_json j;
  j["command"] = manifest.command;
  j["code_version"] = manifest.code_version;
  j["master_seed"] = manifest.master_seed;
  if (manifest.config_echo.empty()) {
    j["config"] = nullptr;
  } else {
    try {
      j["config"] = ordered_json::parse(manifest.config_echo);
    } catch (const ordered_json::parse_error&) {
      throw IoError("write_manifest: config_echo is not valid JSON");
    }
  }
  j["path_indices"] = manifest.path_indices;
  ordered_json files = ordered_json::array();
  for (const ManifestFile& f : manifest.files) {
    ordered_json fj;
    fj["name"] = f.name;
    fj["bytes"] = f.bytes;
    fj["sha256"] = f.sha256;
    files.push_back(std::move(fj));
  }
  j["files"] = std::move(files);

  std::ofstream out = open_text(path, "write_manifest");
  out << j.dump(2) << '\n';
  finish_text(out, path, "write_manifest");
}

}  // namespace smag
