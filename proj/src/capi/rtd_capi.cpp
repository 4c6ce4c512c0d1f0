#include "rtd.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <new>
#include <string>

#include <json.hpp>

#include "bounds.hpp"
#include "state_io.hpp"
#include "verify.hpp"

using nlohmann::json;

struct rtd_state {
  rtd::StateData data;
};

struct rtd_report {
  json doc;
  std::string text;
  mutable std::mutex mu;
  mutable std::map<std::string, std::string> strings;
};

namespace {

thread_local std::string g_last_error;

rtd_status status_of(rtd::ErrorCode code) {
  using rtd::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return RTD_ERR_INVALID;
    case ErrorCode::Parse: return RTD_ERR_PARSE;
    case ErrorCode::Io: return RTD_ERR_IO;
    case ErrorCode::DimensionMismatch: return RTD_ERR_DIMENSION;
    case ErrorCode::NotHermitian: return RTD_ERR_NOT_HERMITIAN;
    case ErrorCode::NotPSD: return RTD_ERR_NOT_PSD;
    case ErrorCode::BadFactorIndex: return RTD_ERR_BAD_FACTOR;
    case ErrorCode::UnsupportedInput: return RTD_ERR_UNSUPPORTED;
    case ErrorCode::DeltaNegative: return RTD_ERR_DELTA_NEGATIVE;
    case ErrorCode::HypothesisNotMet: return RTD_ERR_HYPOTHESIS;
    case ErrorCode::NotExact: return RTD_ERR_NOT_EXACT;
    case ErrorCode::Internal: return RTD_ERR_INTERNAL;
  }
  return RTD_ERR_INTERNAL;
}

rtd_status set_error(rtd_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
rtd_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const rtd::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const json::exception& e) {
    return set_error(RTD_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(RTD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(RTD_ERR_INTERNAL, e.what());
  }
}

json num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

rtd_report* make_report(json doc) {
  auto* r = new rtd_report;
  doc["schema"] = "rtd-report/1";
  r->doc = std::move(doc);
  r->text = r->doc.dump(2);
  return r;
}

rtd::TheoryKind kind_of(rtd_theory t) {
  switch (t) {
    case RTD_COHERENCE: return rtd::TheoryKind::Coherence;
    case RTD_ENTANGLEMENT: return rtd::TheoryKind::Entanglement;
    case RTD_PURITY: return rtd::TheoryKind::Purity;
  }
  rtd::fail(rtd::ErrorCode::InvalidArgument, "unknown theory");
}

rtd_options options_or_default(const rtd_options* o) {
  rtd_options out;
  rtd_options_default(&out);
  return o ? *o : out;
}

json state_json(const rtd::DensityOperator& rho) { return json::parse(rtd::serialize_state(rho)); }
json state_json(const rtd::WeightedPureState& psi) { return json::parse(rtd::serialize_state(psi)); }

json matrix_json(const rtd::ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

rtd::WeightedPureState target_of(rtd::TheoryKind kind, const rtd_state* target) {
  if (!target) return rtd::unit_state(kind, 2);
  if (!target->data.pure) rtd::fail(rtd::ErrorCode::InvalidArgument, "target state must be pure");
  const auto& phi = *target->data.pure;
  if (phi.weight() != 1.0) rtd::fail(rtd::ErrorCode::InvalidArgument, "target state must have weight 1");
  return phi;
}

void require(const void* p, const char* what) {
  if (!p) rtd::fail(rtd::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

json bound_json(const rtd::BoundReport& rep) {
  json j;
  j["theory"] = rtd::to_string(rep.kind);
  j["dims"] = rep.dims;
  j["delta"] = rep.delta;
  j["epsilon"] = rep.epsilon;
  j["c_phi"] = num(rep.c_phi);
  j["upper"] = num(rep.upper);
  j["upper_conservative"] = num(rep.upper_conservative);
  j["lower"] = rep.lower;
  j["g_min_smoothed"] = num(rep.g_min_smoothed);
  j["smoothing_kind"] = rtd::to_string(rep.smoothing_kind);
  j["smoothing_radius"] = rep.smoothing_radius;
  j["lower_lhs"] = num(rep.lower_lhs);
  j["lower_rhs"] = num(rep.lower_rhs);
  j["lower_condition"] = rep.lower_condition;
  j["remark_floor"] = rep.remark_floor ? json(*rep.remark_floor) : json(nullptr);
  j["fidelity_sq"] = rep.fidelity_sq ? num(*rep.fidelity_sq) : json(nullptr);
  j["exact"] = rep.exact;
  j["heuristic_flags"] = rep.heuristic_flags;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

const json* lookup(const rtd_report* r, const char* key) {
  if (!r || !key) return nullptr;
  try {
    if (key[0] == '/') {
      const json::json_pointer ptr(key);
      return r->doc.contains(ptr) ? &r->doc.at(ptr) : nullptr;
    }
    const auto it = r->doc.find(key);
    return it == r->doc.end() ? nullptr : &*it;
  } catch (const json::exception&) {
    return nullptr;
  }
}

}  // namespace

extern "C" {

void rtd_options_default(rtd_options* o) {
  if (!o) return;
  std::memset(o, 0, sizeof(*o));
  o->tol = 1e-9;
  o->pure_ball = 1;
  o->sample_size = 1000;
  o->dim_max = 4;
  o->trials = 50;
}

const char* rtd_version(void) { return "0.1.0"; }

const char* rtd_status_name(rtd_status s) {
  switch (s) {
    case RTD_OK: return "ok";
    case RTD_ERR_INVALID: return "invalid_argument";
    case RTD_ERR_PARSE: return "parse_error";
    case RTD_ERR_IO: return "io_error";
    case RTD_ERR_DIMENSION: return "dimension_mismatch";
    case RTD_ERR_NOT_HERMITIAN: return "not_hermitian";
    case RTD_ERR_NOT_PSD: return "not_psd";
    case RTD_ERR_BAD_FACTOR: return "bad_factor_index";
    case RTD_ERR_UNSUPPORTED: return "unsupported_input";
    case RTD_ERR_DELTA_NEGATIVE: return "delta_negative";
    case RTD_ERR_HYPOTHESIS: return "hypothesis_not_met";
    case RTD_ERR_NOT_EXACT: return "not_exact";
    case RTD_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* rtd_last_error(void) { return g_last_error.c_str(); }

rtd_status rtd_theory_parse(const char* name, rtd_theory* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    switch (rtd::parse_theory_kind(name)) {
      case rtd::TheoryKind::Coherence: *out = RTD_COHERENCE; break;
      case rtd::TheoryKind::Entanglement: *out = RTD_ENTANGLEMENT; break;
      case rtd::TheoryKind::Purity: *out = RTD_PURITY; break;
    }
    return RTD_OK;
  });
}

rtd_status rtd_state_load(const char* path, rtd_state** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rtd_state{rtd::load_state(path)};
    return RTD_OK;
  });
}

rtd_status rtd_state_from_json(const char* text, rtd_state** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new rtd_state{rtd::parse_state(text)};
    return RTD_OK;
  });
}

rtd_status rtd_state_unit(rtd_theory theory, size_t d, size_t copies, rtd_state** out) {
  return guarded([&] {
    require(out, "out");
    if (d < 2) rtd::fail(rtd::ErrorCode::InvalidArgument, "unit state needs d >= 2");
    if (copies < 1) rtd::fail(rtd::ErrorCode::InvalidArgument, "copies must be positive");
    const auto kind = kind_of(theory);
    const auto phi = rtd::unit_state(kind, d);
    const auto power = rtd::tensor_power(rtd::TheoryDescriptor(kind, phi.dims()), phi, copies);
    if (power.dim() > 4096) rtd::fail(rtd::ErrorCode::UnsupportedInput, "unit state power too large");
    *out = new rtd_state{rtd::make_state(power)};
    return RTD_OK;
  });
}

rtd_status rtd_state_to_json(const rtd_state* state, char** out) {
  return guarded([&] {
    require(state, "state");
    require(out, "out");
    const auto s = rtd::serialize_state(state->data);
    *out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!*out) throw std::bad_alloc();
    std::memcpy(*out, s.c_str(), s.size() + 1);
    return RTD_OK;
  });
}

size_t rtd_state_dim(const rtd_state* state) { return state ? state->data.density.dim() : 0; }
int rtd_state_is_pure(const rtd_state* state) { return state && state->data.pure ? 1 : 0; }
void rtd_state_free(rtd_state* state) { delete state; }
void rtd_string_free(char* s) { std::free(s); }

rtd_status rtd_gmin(rtd_theory theory, const rtd_state* rho, const rtd_options* opts, rtd_report** out) {
  return guarded([&] {
    require(rho, "rho");
    require(out, "out");
    const auto o = options_or_default(opts);
    const rtd::TheoryDescriptor th(kind_of(theory), rho->data.dims);
    json j;
    j["command"] = "gmin";
    j["theory"] = rtd::to_string(th.kind());
    if (!o.smooth) {
      const auto ov = rho->data.pure ? rtd::max_overlap(th, *rho->data.pure) : rtd::max_overlap(th, rho->data.density);
      j["value"] = num(-std::log2(ov.value));
      j["overlap"] = ov.value;
      j["argmax"] = state_json(ov.argmax);
      j["exact"] = true;
      j["smoothed"] = false;
    } else {
      rtd::SmoothingBallSpec spec;
      spec.epsilon = o.epsilon;
      spec.ball = o.pure_ball ? rtd::BallKind::Pure : rtd::BallKind::General;
      spec.seed = o.seed;
      const auto g = rtd::g_min_smoothed(th, rho->data.density, spec);
      j["value"] = num(g.value);
      j["smoothed"] = true;
      j["epsilon"] = o.epsilon;
      j["ball"] = rtd::to_string(spec.ball);
      j["search"] = rtd::to_string(g.search_used);
      j["exact"] = g.exact;
      j["argmax_fidelity"] = g.argmax_fidelity;
      if (g.pure_argmax) j["argmax"] = state_json(*g.pure_argmax);
      else if (g.argmax) j["argmax"] = json{{"kind", "operator"}, {"matrix", matrix_json(*g.argmax)}};
      else j["argmax"] = nullptr;
      j["notes"] = g.notes;
    }
    *out = make_report(std::move(j));
    return RTD_OK;
  });
}

rtd_status rtd_robustness(rtd_theory theory, const rtd_state* rho, rtd_robustness_kind kind, const rtd_options* opts,
                          rtd_report** out) {
  return guarded([&] {
    require(rho, "rho");
    require(out, "out");
    const auto o = options_or_default(opts);
    const rtd::TheoryDescriptor th(kind_of(theory), rho->data.dims);
    rtd::RobustnessOptions ro;
    ro.seed = o.seed;
    rtd::RobustnessResult r;
    json j;
    j["command"] = "robustness";
    j["theory"] = rtd::to_string(th.kind());
    switch (kind) {
      case RTD_ROBUSTNESS_GLOBAL:
        r = rtd::global_robustness(th, rho->data.density, ro);
        j["kind"] = "global";
        break;
      case RTD_ROBUSTNESS_FREE:
        r = rtd::free_robustness(th, rho->data.density, ro);
        j["kind"] = "free";
        break;
      case RTD_ROBUSTNESS_DELTA:
        r = rtd::delta_free_robustness(th, rho->data.density, o.delta, ro);
        j["kind"] = "delta";
        j["delta"] = o.delta;
        break;
      default:
        rtd::fail(rtd::ErrorCode::InvalidArgument, "unknown robustness kind");
    }
    j["value"] = num(r.value);
    j["log_value"] = num(std::isinf(r.value) ? r.value : std::log2(1.0 + r.value));
    j["method"] = rtd::to_string(r.method);
    j["iterations"] = r.iterations;
    j["gap"] = num(r.gap);
    j["exact"] = r.exact;
    j["mixing_state"] = r.mixing_state ? state_json(*r.mixing_state) : json(nullptr);
    j["free_point"] = r.free_point ? state_json(*r.free_point) : json(nullptr);
    j["notes"] = r.notes;
    *out = make_report(std::move(j));
    return RTD_OK;
  });
}

rtd_status rtd_bound(rtd_theory theory, const rtd_state* rho, const rtd_state* target, const rtd_options* opts,
                     rtd_report** out) {
  return guarded([&] {
    require(rho, "rho");
    require(out, "out");
    const auto o = options_or_default(opts);
    const auto kind = kind_of(theory);
    const rtd::TheoryDescriptor th(kind, rho->data.dims);
    rtd::BoundOptions bo;
    bo.smoothing.seed = o.seed;
    const auto rep = rtd::rate_interval(th, rho->data.density, target_of(kind, target), o.delta, o.epsilon, bo);
    json j = bound_json(rep);
    j["command"] = "bound";
    *out = make_report(std::move(j));
    return RTD_OK;
  });
}

rtd_status rtd_distill(rtd_theory theory, const rtd_state* rho, const rtd_state* target, size_t m,
                       const rtd_options* opts, rtd_report** out) {
  return guarded([&] {
    require(rho, "rho");
    require(out, "out");
    *out = nullptr;
    const auto o = options_or_default(opts);
    const auto kind = kind_of(theory);
    const rtd::TheoryDescriptor th(kind, rho->data.dims);
    const auto phi = target_of(kind, target);
    rtd::DistillationOptions dopts;
    dopts.allow_unverified = o.allow_unverified != 0;
    dopts.smoothing.seed = o.seed;
    json j;
    j["command"] = "distill";
    j["theory"] = rtd::to_string(kind);
    j["m"] = m;
    j["delta"] = o.delta;
    j["epsilon"] = o.epsilon;
    try {
      const auto map = rtd::build_distillation_map(th, rho->data.density, phi, m, o.delta, o.epsilon, dopts);
      rtd::CertifyOptions co;
      co.sample_size = o.sample_size;
      co.seed = o.seed;
      co.tol = o.tol;
      const auto cert = rtd::certify_delta_rg(map.channel, kind, o.delta, co);
      const auto output = rtd::apply(map.channel, rho->data.density);
      j["lhs"] = num(map.lhs);
      j["rhs"] = num(map.rhs);
      j["condition"] = map.condition;
      j["hypothesis_met"] = map.hypothesis_met;
      j["effect_epsilon"] = map.effect_epsilon;
      j["effect_overlap"] = map.effect_overlap;
      j["fidelity_sq"] = map.fidelity_sq;
      j["fidelity_guarantee"] = map.fidelity_guarantee;
      j["certificate"] = {{"verdict", cert.verdict},
                          {"exhaustive", cert.exhaustive},
                          {"max_output_lr", num(cert.max_output_lr)},
                          {"checked", cert.checked_points.size()},
                          {"notes", cert.notes}};
      j["exact"] = map.hypothesis_met && cert.exhaustive;
      j["notes"] = map.notes;
      j["output_state"] = state_json(output);
    } catch (const rtd::HypothesisNotMet& e) {
      j["lhs"] = num(e.lhs());
      j["rhs"] = num(e.rhs());
      j["hypothesis_met"] = false;
      j["error"] = e.what();
      *out = make_report(std::move(j));
      return set_error(RTD_ERR_HYPOTHESIS, e.what());
    }
    *out = make_report(std::move(j));
    return RTD_OK;
  });
}

rtd_status rtd_verify(const char* suite, const rtd_options* opts, rtd_report** out) {
  return guarded([&] {
    require(out, "out");
    const auto o = options_or_default(opts);
    rtd::VerifyOptions vo;
    vo.seed = o.seed;
    vo.dim_max = o.dim_max;
    vo.tol = o.tol;
    vo.trials = o.trials;
    const auto rep = rtd::run_verify(suite ? suite : "all", vo);
    json j;
    j["command"] = "verify";
    j["passed"] = rep.passed;
    j["seed"] = o.seed;
    j["dim_max"] = o.dim_max;
    j["tol"] = o.tol;
    json suites = json::array(), failures = json::array();
    for (const auto& s : rep.suites) {
      suites.push_back({{"name", s.name},
                        {"checks", s.checks},
                        {"failures", s.failures.size()},
                        {"seconds", s.seconds}});
      for (const auto& f : s.failures)
        failures.push_back(
            {{"suite", f.suite}, {"check", f.check}, {"lhs", num(f.lhs)}, {"rhs", num(f.rhs)}, {"tol", num(f.tol)}});
    }
    j["suites"] = std::move(suites);
    j["failures"] = std::move(failures);
    *out = make_report(std::move(j));
    return RTD_OK;
  });
}

rtd_status rtd_sweep(rtd_theory theory, const rtd_state* rho, const rtd_state* target, const double* deltas,
                     size_t n_deltas, const double* epsilons, size_t n_epsilons, const rtd_options* opts,
                     rtd_report** out) {
  return guarded([&] {
    require(rho, "rho");
    require(out, "out");
    if ((n_deltas && !deltas) || (n_epsilons && !epsilons))
      rtd::fail(rtd::ErrorCode::InvalidArgument, "grid pointer is NULL");
    const auto o = options_or_default(opts);
    const auto kind = kind_of(theory);
    const rtd::TheoryDescriptor th(kind, rho->data.dims);
    rtd::SweepOptions so;
    so.bounds.smoothing.seed = o.seed;
    so.robustness_column = o.robustness_column != 0;
    so.threads = o.threads;
    const std::vector<double> ds(deltas, deltas + n_deltas), es(epsilons, epsilons + n_epsilons);
    const auto rows = rtd::sweep(th, rho->data.density, target_of(kind, target), ds, es, so);

    std::string csv = "delta,epsilon,upper,lower,c_phi,g_min_smoothed,flags";
    if (so.robustness_column) csv += ",r_delta";
    csv += "\n";
    json arr = json::array();
    for (const auto& row : rows) {
      const auto& r = row.report;
      std::string flags;
      for (const auto& f : r.heuristic_flags) flags += (flags.empty() ? "" : "|") + f;
      if (flags.empty()) flags = r.exact ? "exact" : "heuristic";
      csv += csv_num(r.delta) + "," + csv_num(r.epsilon) + "," + csv_num(r.upper) + "," + std::to_string(r.lower) +
             "," + csv_num(r.c_phi) + "," + csv_num(r.g_min_smoothed) + "," + csv_field(flags);
      json jr = bound_json(r);
      if (so.robustness_column) {
        csv += "," + csv_num(row.r_delta.value_or(std::nan("")));
        jr["r_delta"] = row.r_delta ? num(*row.r_delta) : json(nullptr);
      }
      csv += "\n";
      arr.push_back(std::move(jr));
    }
    json j;
    j["command"] = "sweep";
    j["theory"] = rtd::to_string(kind);
    j["rows"] = std::move(arr);
    j["csv"] = csv;
    *out = make_report(std::move(j));
    return RTD_OK;
  });
}

rtd_status rtd_report_get_double(const rtd_report* report, const char* key, double* out) {
  const json* v = lookup(report, key);
  if (!v || !out) return set_error(RTD_ERR_INVALID, std::string("no such report key: ") + (key ? key : ""));
  if (v->is_number()) {
    *out = v->get<double>();
    return RTD_OK;
  }
  if (v->is_string()) {
    const auto s = v->get<std::string>();
    if (s == "inf" || s == "-inf") {
      *out = s == "inf" ? HUGE_VAL : -HUGE_VAL;
      return RTD_OK;
    }
  }
  return set_error(RTD_ERR_INVALID, std::string("report key is not numeric: ") + key);
}

rtd_status rtd_report_get_int(const rtd_report* report, const char* key, int64_t* out) {
  const json* v = lookup(report, key);
  if (!v || !out || !v->is_number_integer())
    return set_error(RTD_ERR_INVALID, std::string("no integer report key: ") + (key ? key : ""));
  *out = v->get<int64_t>();
  return RTD_OK;
}

rtd_status rtd_report_get_bool(const rtd_report* report, const char* key, int* out) {
  const json* v = lookup(report, key);
  if (!v || !out || !v->is_boolean())
    return set_error(RTD_ERR_INVALID, std::string("no boolean report key: ") + (key ? key : ""));
  *out = v->get<bool>() ? 1 : 0;
  return RTD_OK;
}

rtd_status rtd_report_get_string(const rtd_report* report, const char* key, const char** out) {
  const json* v = lookup(report, key);
  if (!v || !out) return set_error(RTD_ERR_INVALID, std::string("no such report key: ") + (key ? key : ""));
  std::lock_guard<std::mutex> lock(report->mu);
  // Entries are never overwritten, so earlier pointers stay valid.
  const auto it = report->strings.emplace(key, v->is_string() ? v->get<std::string>() : v->dump()).first;
  *out = it->second.c_str();
  return RTD_OK;
}

const char* rtd_report_to_json(const rtd_report* report) { return report ? report->text.c_str() : ""; }

void rtd_report_free(rtd_report* report) { delete report; }

}  // extern "C"
