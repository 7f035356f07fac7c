#include "esgopt/model_params.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace esg {

namespace {

using nlohmann::json;

void require_length(const Eigen::VectorXd& v, int n, const char* field) {
  if (v.size() != n) {
    throw ValidationError(field, -1,
                          "dimension mismatch: length " + std::to_string(v.size()) +
                              ", expected n = " + std::to_string(n));
  }
}

void require_finite(const Eigen::VectorXd& v, const char* field) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) throw ValidationError(field, i, "not finite");
  }
}

void require_positive(const Eigen::VectorXd& v, const char* field) {
  for (int i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0)) throw ValidationError(field, i, "must be > 0");
  }
}

void require_positive(double x, const char* field) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(field, -1, "must be finite and > 0");
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"n",  "c",       "gamma", "nu", "rho", "sigma",
                                          "mu", "s0",      "q0",    "gamma_P", "T", "r"};
  return keys;
}

double read_scalar(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

Eigen::VectorXd read_agent_vector(const json& doc, const char* key, int n) {
  const auto& v = doc.at(key);
  if (v.is_number()) return Eigen::VectorXd::Constant(n, v.get<double>());
  if (!v.is_array()) {
    throw ConfigError(std::string("key '") + key + "' must be a number or an array of numbers");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(std::string("key '") + key + "' element " + std::to_string(i) +
                        " is not a number");
    }
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

bool ModelParams::operator==(const ModelParams& o) const {
  return n == o.n && c == o.c && gamma == o.gamma && nu == o.nu && rho == o.rho &&
         sigma == o.sigma && mu == o.mu && s0 == o.s0 && q0 == o.q0 && gamma_P == o.gamma_P &&
         T == o.T && r == o.r;
}

ModelParams validate(const ModelParams& raw) {
  if (raw.n < 1) throw ValidationError("n", -1, "team size must be a positive integer");
  const int n = raw.n;
  require_length(raw.c, n, "c");
  require_length(raw.gamma, n, "gamma");
  require_length(raw.nu, n, "nu");
  require_length(raw.rho, n, "rho");
  require_length(raw.q0, n, "q0");
  require_length(raw.r, n, "r");

  require_finite(raw.c, "c");
  require_finite(raw.gamma, "gamma");
  require_finite(raw.nu, "nu");
  require_finite(raw.rho, "rho");
  require_finite(raw.q0, "q0");
  require_finite(raw.r, "r");
  require_positive(raw.c, "c");
  require_positive(raw.gamma, "gamma");
  require_positive(raw.nu, "nu");
  for (int i = 0; i < n; ++i) {
    if (!(std::abs(raw.rho(i)) < 1.0)) {
      throw ValidationError("rho", i, "correlation out of open interval (-1, 1)");
    }
  }
  require_positive(raw.sigma, "sigma");
  require_positive(raw.s0, "s0");
  require_positive(raw.T, "T");
  if (!std::isfinite(raw.mu)) throw ValidationError("mu", -1, "not finite");
  if (!(raw.gamma_P >= 0.0) || !std::isfinite(raw.gamma_P)) {
    throw ValidationError("gamma_P", -1, "principal risk aversion must be finite and >= 0");
  }
  return raw;
}

ModelParams homogeneous_params(int n, double c, double gamma, double nu, double rho, double sigma,
                               double gamma_P, double mu, double s0, double q0, double T,
                               double r) {
  if (n < 1) throw ValidationError("n", -1, "team size must be a positive integer");
  ModelParams p;
  p.n = n;
  p.c = Eigen::VectorXd::Constant(n, c);
  p.gamma = Eigen::VectorXd::Constant(n, gamma);
  p.nu = Eigen::VectorXd::Constant(n, nu);
  p.rho = Eigen::VectorXd::Constant(n, rho);
  p.sigma = sigma;
  p.mu = mu;
  p.s0 = s0;
  p.q0 = Eigen::VectorXd::Constant(n, q0);
  p.gamma_P = gamma_P;
  p.T = T;
  p.r = Eigen::VectorXd::Constant(n, r);
  return validate(p);
}

ModelParams load_config(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source.begin(), source.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!known_keys().count(item.key())) throw ConfigError("unknown key '" + item.key() + "'");
  }
  for (const char* key : {"n", "c", "gamma", "nu", "rho", "sigma", "gamma_P"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("missing required key '") + key + "'");
  }
  const auto& jn = doc.at("n");
  if (!jn.is_number_integer()) throw ConfigError("key 'n' must be an integer");

  ModelParams p;
  p.n = jn.get<int>();
  if (p.n < 1) throw ValidationError("n", -1, "team size must be a positive integer");
  p.c = read_agent_vector(doc, "c", p.n);
  p.gamma = read_agent_vector(doc, "gamma", p.n);
  p.nu = read_agent_vector(doc, "nu", p.n);
  p.rho = read_agent_vector(doc, "rho", p.n);
  p.sigma = read_scalar(doc, "sigma");
  p.gamma_P = read_scalar(doc, "gamma_P");
  p.mu = doc.contains("mu") ? read_scalar(doc, "mu") : 0.0;
  p.s0 = doc.contains("s0") ? read_scalar(doc, "s0") : 1.0;
  p.T = doc.contains("T") ? read_scalar(doc, "T") : 1.0;
  p.q0 = doc.contains("q0") ? read_agent_vector(doc, "q0", p.n) : Eigen::VectorXd::Zero(p.n);
  p.r = doc.contains("r") ? read_agent_vector(doc, "r", p.n) : Eigen::VectorXd::Zero(p.n);
  return validate(p);
}

ModelParams load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

std::string serialize(const ModelParams& p) {
  json doc;
  doc["n"] = p.n;
  doc["c"] = to_array(p.c);
  doc["gamma"] = to_array(p.gamma);
  doc["nu"] = to_array(p.nu);
  doc["rho"] = to_array(p.rho);
  doc["sigma"] = p.sigma;
  doc["mu"] = p.mu;
  doc["s0"] = p.s0;
  doc["q0"] = to_array(p.q0);
  doc["gamma_P"] = p.gamma_P;
  doc["T"] = p.T;
  doc["r"] = to_array(p.r);
  return doc.dump(2);
}

ModelParams with_gamma_P(ModelParams p, double gamma_P) {
  p.gamma_P = gamma_P;
  return validate(p);
}

std::string preset_directory() {
  if (const char* env = std::getenv("ESGOPT_PRESET_DIR")) return env;
#ifdef ESGOPT_PRESET_DIR
  return ESGOPT_PRESET_DIR;
#else
  return "presets";
#endif
}

}  // namespace esg
