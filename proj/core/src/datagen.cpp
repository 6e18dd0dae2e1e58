#include "gnull/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "gnull/error.hpp"
#include "gnull/glm.hpp"
#include "gnull/textio.hpp"

namespace gnull::datagen {

DgpConfig DgpConfig::continuous_defaults(int K, std::size_t n,
                                         std::uint64_t master_seed) {
  DgpConfig cfg;
  cfg.treatment_kind = TreatmentKind::continuous;
  cfg.K = K;
  cfg.n = n;
  cfg.master_seed = master_seed;
  cfg.alpha = {1.0, -0.015, 1.0, 0.015};
  return cfg;
}

DgpConfig DgpConfig::binary_defaults(int K, std::size_t n,
                                     std::uint64_t master_seed) {
  DgpConfig cfg;
  cfg.treatment_kind = TreatmentKind::binary;
  cfg.K = K;
  cfg.n = n;
  cfg.master_seed = master_seed;
  cfg.alpha = {0.0, -2.5, 1.0, 2.5};
  return cfg;
}

void DgpConfig::validate() const {
  if (K < 1) {
    throw Error(errc::invalid_argument, "K must be at least 1");
  }
  if (n < 1) {
    throw Error(errc::invalid_argument, "n must be at least 1");
  }
  if (n_prebaseline < 0) {
    throw Error(errc::invalid_argument, "n_prebaseline must be nonnegative");
  }
  if (!(continuous.sd > 0.0) || !(continuous.lower < continuous.upper)) {
    throw Error(errc::invalid_argument,
                "continuous treatment needs sd > 0 and ordered bounds");
  }
  if (!(outcome_sd > 0.0) || !(outcome_lower < outcome_upper)) {
    throw Error(errc::invalid_argument,
                "outcome needs sd > 0 and ordered bounds");
  }
}

double sample_truncated_normal(double mu, double sigma, double lower,
                               double upper, Rng& rng) {
  if (!(sigma > 0.0)) {
    throw Error(errc::invalid_argument, "truncated normal requires sigma > 0");
  }
  if (!(lower < upper)) {
    throw Error(errc::invalid_argument,
                "truncated normal requires lower < upper");
  }
  const double za = (lower - mu) / sigma;
  const double zb = (upper - mu) / sigma;
  const double pa = norm_cdf(za);
  const double pb = norm_cdf(zb);
  if (pb - pa >= 0.01) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const double z = rng.normal();
      if (z >= za && z <= zb) {
        return mu + sigma * z;
      }
    }
    // Unreachable in practice at 1% acceptance; fall through to inversion.
  }
  const double u =
      std::clamp(pa + (pb - pa) * rng.uniform_open01(), 1e-300, 1.0 - 1e-16);
  return std::clamp(mu + sigma * norm_ppf(u), lower, upper);
}

Trajectory generate_individual(const DgpConfig& cfg, std::int64_t id,
                               std::uint64_t stream_key) {
  Rng rng_u(derive_seed(stream_key, {stream::baseline_u}));
  Rng rng_l(derive_seed(stream_key, {stream::covariate}));
  Rng rng_a(derive_seed(stream_key, {stream::treatment}));
  Rng rng_y(derive_seed(stream_key, {stream::outcome}));

  const int P = cfg.n_prebaseline;
  const int K = cfg.K;

  Trajectory t;
  t.id = id;
  const double u = rng_u.uniform_open01();
  t.u = u;
  t.l.resize(static_cast<std::size_t>(P + K + 1));
  t.a.resize(static_cast<std::size_t>(K + 1));

  // History up to time 0 is drawn with no prior treatment.
  const double p0 = glm::expit(cfg.alpha[0] + cfg.alpha[2] * u);
  for (int time = -P; time <= 0; ++time) {
    t.l[static_cast<std::size_t>(time + P)] = rng_l.bernoulli(p0) ? 1.0 : 0.0;
  }

  double a_prev = 0.0;
  for (int k = 0; k <= K; ++k) {
    if (k >= 1) {
      const double logit = cfg.alpha[0] + cfg.alpha[1] * a_prev +
                           cfg.alpha[2] * u + cfg.alpha[3] * a_prev * u;
      t.l[static_cast<std::size_t>(k + P)] =
          rng_l.bernoulli(glm::expit(logit)) ? 1.0 : 0.0;
    }
    const double lk = t.l[static_cast<std::size_t>(k + P)];
    if (cfg.treatment_kind == TreatmentKind::binary) {
      const auto& b = cfg.binary.logit;
      const double logit = b[0] + b[1] * a_prev + b[2] * lk +
                           b[3] * a_prev * lk;
      t.a[static_cast<std::size_t>(k)] =
          rng_a.bernoulli(glm::expit(logit)) ? 1.0 : 0.0;
    } else {
      const auto& c = cfg.continuous;
      const double mean = c.intercept + c.lag_slope * a_prev +
                          c.covariate_slope * lk + c.interaction * a_prev * lk;
      t.a[static_cast<std::size_t>(k)] =
          sample_truncated_normal(mean, c.sd, c.lower, c.upper, rng_a);
    }
    a_prev = t.a[static_cast<std::size_t>(k)];
  }

  t.y = sample_truncated_normal(cfg.outcome_intercept + cfg.outcome_u_slope * u,
                                cfg.outcome_sd, cfg.outcome_lower,
                                cfg.outcome_upper, rng_y);
  return t;
}

Dataset generate_dataset(const DgpConfig& cfg, std::uint64_t replicate_index) {
  cfg.validate();
  Dataset data;
  data.reserve(cfg.n);
  for (std::size_t id = 0; id < cfg.n; ++id) {
    const std::uint64_t key = derive_seed(
        cfg.master_seed,
        {stream::individual, replicate_index, static_cast<std::uint64_t>(id)});
    data.push_back(
        generate_individual(cfg, static_cast<std::int64_t>(id), key));
  }
  return data;
}

void write_csv(std::ostream& os, const Dataset& data, bool include_u) {
  os << (include_u ? "id,time,L,A,Y,U\n" : "id,time,L,A,Y\n");
  for (const auto& t : data) {
    if (include_u && !t.u.has_value()) {
      throw Error(errc::missing_u, "dataset lacks u; cannot write a U column");
    }
    const int P = t.prebaseline();
    const int K = t.K();
    for (int time = -P; time <= K; ++time) {
      os << t.id << ',' << time << ',' << fmt_double(t.l_at(time)) << ',';
      if (time >= 0) {
        os << fmt_double(t.a[static_cast<std::size_t>(time)]);
      }
      os << ',';
      if (time == K) {
        os << fmt_double(t.y);
      }
      if (include_u) {
        os << ',' << fmt_double(*t.u);
      }
      os << '\n';
    }
  }
}

void write_csv_file(const std::filesystem::path& path, const Dataset& data,
                    bool include_u) {
  std::ofstream os(path);
  if (!os) {
    throw Error(errc::io_error, "cannot open " + path.string() + " for write");
  }
  write_csv(os, data, include_u);
  if (!os.good()) {
    throw Error(errc::io_error, "write failed for " + path.string());
  }
}

namespace {

[[noreturn]] void csv_fail(std::size_t line_no, const std::string& what) {
  std::ostringstream msg;
  msg << "row " << line_no << ": " << what;
  throw Error(errc::invalid_argument, msg.str());
}

double parse_number(const std::string& field, std::size_t line_no,
                    const char* column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size() || !std::isfinite(v)) {
      csv_fail(line_no, std::string("bad ") + column + " value '" + field +
                            "'");
    }
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    csv_fail(line_no,
             std::string("bad ") + column + " value '" + field + "'");
  }
}

long long parse_integer(const std::string& field, std::size_t line_no,
                        const char* column) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(field, &pos);
    if (pos != field.size()) {
      csv_fail(line_no, std::string("bad ") + column + " value '" + field +
                            "'");
    }
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    csv_fail(line_no,
             std::string("bad ") + column + " value '" + field + "'");
  }
}

}  // namespace

Dataset read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw Error(errc::invalid_argument, "empty CSV");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  bool has_u = false;
  if (line == "id,time,L,A,Y,U") {
    has_u = true;
  } else if (line != "id,time,L,A,Y") {
    throw Error(errc::invalid_argument,
                "CSV header must be id,time,L,A,Y (optionally followed by U)");
  }
  const std::size_t n_cols = has_u ? 6u : 5u;

  Dataset data;
  std::unordered_set<long long> closed_ids;
  Trajectory current;
  bool open = false;
  int expected_time = 0;
  int P = -1, K = -1;  // inferred from the first trajectory
  std::vector<double> l_buf, a_buf;
  double y_val = 0.0;
  bool y_seen = false;
  std::optional<double> u_val;
  std::size_t line_no = 1;

  auto finish_trajectory = [&](std::size_t at_line) {
    if (!y_seen) {
      csv_fail(at_line, "missing Y at time K for id " +
                            std::to_string(current.id));
    }
    current.l = l_buf;
    current.a = a_buf;
    current.y = y_val;
    current.u = u_val;
    data.push_back(std::move(current));
    closed_ids.insert(data.back().id);
    current = Trajectory{};
    l_buf.clear();
    a_buf.clear();
    y_seen = false;
    u_val.reset();
    open = false;
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != n_cols) {
      csv_fail(line_no, "expected " + std::to_string(n_cols) + " columns, got " +
                            std::to_string(fields.size()));
    }
    const long long id = parse_integer(fields[0], line_no, "id");
    const long long time_ll = parse_integer(fields[1], line_no, "time");
    const int time = static_cast<int>(time_ll);

    if (!open || id != current.id) {
      if (open) {
        finish_trajectory(line_no);
      }
      if (closed_ids.count(id)) {
        csv_fail(line_no, "rows for id " + std::to_string(id) +
                              " are not contiguous");
      }
      current.id = id;
      open = true;
      if (P < 0) {
        if (time > 0) {
          csv_fail(line_no, "first time for an id must be at most 0");
        }
        P = -time;
      } else if (time != -P) {
        csv_fail(line_no, "id " + std::to_string(id) + " must start at time " +
                              std::to_string(-P));
      }
      expected_time = -P;
    }
    if (time != expected_time) {
      csv_fail(line_no, "expected time " + std::to_string(expected_time) +
                            " for id " + std::to_string(id));
    }
    ++expected_time;

    l_buf.push_back(parse_number(fields[2], line_no, "L"));

    if (time < 0) {
      if (!fields[3].empty()) {
        csv_fail(line_no, "A must be empty before time 0");
      }
    } else {
      if (fields[3].empty()) {
        csv_fail(line_no, "missing A at time " + std::to_string(time));
      }
      a_buf.push_back(parse_number(fields[3], line_no, "A"));
    }

    const bool at_K = (K >= 0) ? (time == K) : false;
    if (!fields[4].empty()) {
      if (K < 0) {
        K = time;  // first trajectory defines K at its Y row
      } else if (time != K) {
        csv_fail(line_no, "Y present before time K");
      }
      y_val = parse_number(fields[4], line_no, "Y");
      y_seen = true;
    } else if (at_K) {
      csv_fail(line_no, "missing Y at time K for id " + std::to_string(id));
    }

    if (has_u) {
      const double u = parse_number(fields[5], line_no, "U");
      if (u_val.has_value() && *u_val != u) {
        csv_fail(line_no, "U must be constant within an id");
      }
      u_val = u;
    }

    if (K >= 0 && time == K) {
      finish_trajectory(line_no);
    }
  }
  if (open) {
    csv_fail(line_no, "trajectory for id " + std::to_string(current.id) +
                          " ends before time K");
  }
  if (data.empty()) {
    throw Error(errc::invalid_argument, "CSV contains no data rows");
  }
  return data;
}

Dataset read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw Error(errc::invalid_argument,
                "cannot open " + path.string() + " for read");
  }
  return read_csv(is);
}

}  // namespace gnull::datagen
