#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "slda/errors.hpp"
#include "slda/train.hpp"

namespace slda {

namespace {

// %.17g decimals round trip doubles exactly through strtod.
std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* family_name(Family kind) {
  return kind == Family::Gaussian ? "gaussian" : "poisson";
}

const char* lognorm_name(PoissonLogNorm mode) {
  return mode == PoissonLogNorm::IndicatorExact ? "indicator-exact" : "paper-literal";
}

const char* dispersion_name(PoissonDispersion mode) {
  return mode == PoissonDispersion::FixedOne ? "fixed-one" : "paper-ratio";
}

const char* transform_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::None: return "none";
    case TransformKind::Log: return "log";
    case TransformKind::ShiftedLog: return "shifted-log";
  }
  return "none";
}

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw SchemaError(std::string("model file schema violation: missing field '") +
                      key + "'");
  }
  return j.at(key);
}

double require_number(const json& j, const char* key) {
  const json& value = require(j, key);
  if (!value.is_number()) {
    throw SchemaError(std::string("model file schema violation: field '") + key +
                      "' is not a number");
  }
  return value.get<double>();
}

std::string require_string(const json& j, const char* key) {
  const json& value = require(j, key);
  if (!value.is_string()) {
    throw SchemaError(std::string("model file schema violation: field '") + key +
                      "' is not a string");
  }
  return value.get<std::string>();
}

double logsumexp_row(const Eigen::MatrixXd& m, Eigen::Index row) {
  const double mx = m.row(row).maxCoeff();
  return mx + std::log((m.row(row).array() - mx).exp().sum());
}

}  // namespace

void save_model(const ModelParams& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_model: cannot open '" + path + "' for writing");
  }
  out << "{\n";
  out << "  \"version\": 1,\n";
  out << "  \"family\": \"" << family_name(model.family.kind) << "\",\n";
  out << "  \"modes\": {\"poisson_lognorm\": \"" << lognorm_name(model.family.lognorm)
      << "\", \"poisson_dispersion\": \"" << dispersion_name(model.family.dispersion)
      << "\"},\n";
  out << "  \"K\": " << model.num_topics() << ",\n";
  out << "  \"V\": " << model.vocab_size() << ",\n";
  out << "  \"alpha\": " << decimal(model.alpha) << ",\n";
  out << "  \"eta\": [";
  for (Eigen::Index i = 0; i < model.glm.eta.size(); ++i) {
    if (i > 0) out << ", ";
    out << decimal(model.glm.eta[i]);
  }
  out << "],\n";
  out << "  \"delta\": " << decimal(model.glm.delta) << ",\n";
  out << "  \"transform\": {\"mode\": \"" << transform_name(model.transform.kind)
      << "\", \"shift\": " << decimal(model.transform.shift) << "},\n";
  out << "  \"log_beta\": [\n";
  for (Eigen::Index row = 0; row < model.log_beta.rows(); ++row) {
    out << "    [";
    for (Eigen::Index col = 0; col < model.log_beta.cols(); ++col) {
      if (col > 0) out << ", ";
      out << decimal(model.log_beta(row, col));
    }
    out << (row + 1 < model.log_beta.rows() ? "],\n" : "]\n");
  }
  out << "  ]\n";
  out << "}\n";
  out.flush();
  if (!out) {
    throw std::runtime_error("save_model: write to '" + path + "' failed");
  }
}

ModelParams load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_model: cannot open '" + path + "'");
  }
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("model file schema violation: ") + e.what());
  }
  if (!j.is_object()) {
    throw SchemaError("model file schema violation: top level is not an object");
  }

  const json& version = require(j, "version");
  if (!version.is_number_integer()) {
    throw SchemaError("model file schema violation: 'version' is not an integer");
  }
  if (version.get<int>() != 1) {
    throw VersionError("model file version mismatch: expected 1, found " +
                       std::to_string(version.get<int>()));
  }

  ModelParams model;
  const std::string family = require_string(j, "family");
  if (family == "gaussian") {
    model.family.kind = Family::Gaussian;
  } else if (family == "poisson") {
    model.family.kind = Family::Poisson;
  } else {
    throw SchemaError("model file schema violation: unknown family '" + family + "'");
  }

  const json& modes = require(j, "modes");
  const std::string lognorm = require_string(modes, "poisson_lognorm");
  if (lognorm == "indicator-exact") {
    model.family.lognorm = PoissonLogNorm::IndicatorExact;
  } else if (lognorm == "paper-literal") {
    model.family.lognorm = PoissonLogNorm::PaperLiteral;
  } else {
    throw SchemaError("model file schema violation: unknown poisson_lognorm mode");
  }
  const std::string dispersion = require_string(modes, "poisson_dispersion");
  if (dispersion == "fixed-one") {
    model.family.dispersion = PoissonDispersion::FixedOne;
  } else if (dispersion == "paper-ratio") {
    model.family.dispersion = PoissonDispersion::PaperRatio;
  } else {
    throw SchemaError("model file schema violation: unknown poisson_dispersion mode");
  }

  const double k_field = require_number(j, "K");
  const double v_field = require_number(j, "V");
  const Eigen::Index k = static_cast<Eigen::Index>(k_field);
  const Eigen::Index v = static_cast<Eigen::Index>(v_field);
  if (k < 1 || v < 1) {
    throw SchemaError("model file schema violation: K and V must be positive");
  }

  model.alpha = require_number(j, "alpha");
  if (!(model.alpha > 0.0)) {
    throw SchemaError("model file schema violation: alpha must be positive");
  }

  const json& eta = require(j, "eta");
  if (!eta.is_array() || static_cast<Eigen::Index>(eta.size()) != k) {
    throw SchemaError("model file schema violation: 'eta' must be an array of length K");
  }
  model.glm.eta.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!eta[i].is_number()) {
      throw SchemaError("model file schema violation: 'eta' entries must be numbers");
    }
    model.glm.eta[i] = eta[i].get<double>();
  }

  model.glm.delta = require_number(j, "delta");
  if (!(model.glm.delta > 0.0)) {
    throw SchemaError("model file schema violation: delta must be positive");
  }

  if (j.contains("transform")) {
    const json& transform = j.at("transform");
    const std::string mode = require_string(transform, "mode");
    if (mode == "none") {
      model.transform.kind = TransformKind::None;
    } else if (mode == "log") {
      model.transform.kind = TransformKind::Log;
    } else if (mode == "shifted-log") {
      model.transform.kind = TransformKind::ShiftedLog;
    } else {
      throw SchemaError("model file schema violation: unknown transform mode");
    }
    model.transform.shift = require_number(transform, "shift");
  }

  const json& log_beta = require(j, "log_beta");
  if (!log_beta.is_array() || static_cast<Eigen::Index>(log_beta.size()) != k) {
    throw SchemaError("model file schema violation: 'log_beta' must have K rows");
  }
  model.log_beta.resize(k, v);
  for (Eigen::Index row = 0; row < k; ++row) {
    const json& jrow = log_beta[row];
    if (!jrow.is_array() || static_cast<Eigen::Index>(jrow.size()) != v) {
      throw SchemaError("model file schema violation: 'log_beta' rows must have V entries");
    }
    for (Eigen::Index col = 0; col < v; ++col) {
      if (!jrow[col].is_number()) {
        throw SchemaError("model file schema violation: 'log_beta' entries must be numbers");
      }
      model.log_beta(row, col) = jrow[col].get<double>();
    }
    if (std::abs(logsumexp_row(model.log_beta, row)) > 1e-8) {
      throw SchemaError("model file schema violation: log_beta row " +
                        std::to_string(row) + " is not normalized");
    }
  }
  return model;
}

}  // namespace slda
