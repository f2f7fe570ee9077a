#include "qsd/pair_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

using nlohmann::json;

namespace {

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json row_to_json(const CVector& r) {
  json a = json::array();
  for (Eigen::Index i = 0; i < r.size(); ++i) a.push_back(complex_to_json(r(i)));
  return a;
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(row_to_json(m.row(i).transpose()));
  return rows;
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("pair: missing field '") + key + "'");
  return *it;
}

cplx complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError("pair: " + where + " must be a [re, im] pair of numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

CVector row_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError("pair: " + where + " must be an array");
  CVector r(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    r(static_cast<Eigen::Index>(i)) = complex_from_json(j[i], where + "[" + std::to_string(i) + "]");
  }
  return r;
}

CMatrix matrix_from_json(const json& j, Eigen::Index n, const std::string& where) {
  if (!j.is_array()) throw ParseError("pair: " + where + " must be an array of rows");
  if (static_cast<Eigen::Index>(j.size()) != n) {
    throw ValidationError("pair: " + where + " has " + std::to_string(j.size()) + " rows, expected n");
  }
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const CVector r = row_from_json(j[static_cast<std::size_t>(i)], w);
    if (r.size() != n) throw ValidationError("pair: " + w + " has wrong length");
    m.row(i) = r.transpose();
  }
  return m;
}

HermitianMatrix hermitian_from_full(const CMatrix& m, const std::string& where) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("pair: " + where + " is not Hermitian");
  }
  return HermitianMatrix(m);
}

HermitianMatrix hermitian_from_row(const CVector& r, Eigen::Index n, const std::string& where) {
  if (r.size() != n) throw ValidationError("pair: " + where + " length differs from n");
  if (n > 0 && r(0).imag() != 0.0) throw ValidationError("pair: " + where + "[0] must be real");
  return HermitianMatrix::toeplitz(r);
}

}  // namespace

std::string pair_to_json(const DefinitePair& pair, bool prefer_toeplitz) {
  json j;
  j["n"] = pair.S.dim();
  const bool toep = prefer_toeplitz && pair.first_row_H && pair.first_row_S;
  j["toeplitz"] = toep;
  if (toep) {
    j["first_row_H"] = row_to_json(*pair.first_row_H);
    j["first_row_S"] = row_to_json(*pair.first_row_S);
  } else {
    j["H"] = matrix_to_json(pair.H.mat());
    j["S"] = matrix_to_json(pair.S.mat());
  }
  const char* prov = pair.provenance == Provenance::exact   ? "exact"
                     : pair.provenance == Provenance::noisy ? "noisy"
                                                            : "synthetic";
  j["provenance"] = prov;
  j["meta"] = pair.meta.empty() ? json::object() : json::parse(pair.meta);
  return j.dump(1);
}

DefinitePair pair_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("pair: malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("pair: document must be a JSON object");
  const json& jn = field(j, "n");
  if (!jn.is_number_integer() || jn.get<long long>() < 1) {
    throw ParseError("pair: 'n' must be a positive integer");
  }
  const auto n = static_cast<Eigen::Index>(jn.get<long long>());
  bool toep = false;
  if (auto it = j.find("toeplitz"); it != j.end()) {
    if (!it->is_boolean()) throw ParseError("pair: 'toeplitz' must be a boolean");
    toep = it->get<bool>();
  }

  DefinitePair p;
  if (toep) {
    const CVector rh = row_from_json(field(j, "first_row_H"), "first_row_H");
    const CVector rs = row_from_json(field(j, "first_row_S"), "first_row_S");
    p.H = hermitian_from_row(rh, n, "first_row_H");
    p.S = hermitian_from_row(rs, n, "first_row_S");
    p.first_row_H = rh;
    p.first_row_S = rs;
  } else {
    p.H = hermitian_from_full(matrix_from_json(field(j, "H"), n, "H"), "H");
    p.S = hermitian_from_full(matrix_from_json(field(j, "S"), n, "S"), "S");
  }
  if (auto it = j.find("provenance"); it != j.end()) {
    const std::string pv = it->is_string() ? it->get<std::string>() : "";
    if (pv == "exact") p.provenance = Provenance::exact;
    else if (pv == "noisy") p.provenance = Provenance::noisy;
    else if (pv == "synthetic") p.provenance = Provenance::synthetic;
    else throw ValidationError("pair: unknown provenance");
  }
  if (auto it = j.find("meta"); it != j.end()) p.meta = it->dump();
  return p;
}

void cache_pair(const DefinitePair& pair, const std::string& path, bool prefer_toeplitz) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cache_pair: cannot open '" + path + "'");
  out << pair_to_json(pair, prefer_toeplitz) << '\n';
  if (!out) throw InvalidInput("cache_pair: write failed for '" + path + "'");
}

DefinitePair load_pair(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("load_pair: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return pair_from_json(ss.str());
}

}  // namespace qsd
