#include "disent/state_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace disent {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::InvalidFile, msg); }

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

ComplexMatrix read_part(const json& doc, const char* field, int n, ComplexMatrix m, bool imag) {
  if (!doc.contains(field)) fail(std::string("missing field '") + field + "'");
  const auto& rows = doc[field];
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    fail(std::string("field '") + field + "' must be an array of " + std::to_string(n) + " rows");
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      fail(std::string("field '") + field + "' row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) {
      if (!row[j].is_number())
        fail(std::string("field '") + field + "' entry [" + std::to_string(i) + "][" + std::to_string(j) + "] is not a number");
      const double v = row[j].get<double>();
      if (imag)
        m(i, j).imag(v);
      else
        m(i, j).real(v);
    }
  }
  return m;
}

}  // namespace

DensityOperator parse_state_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    fail("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  if (!doc.is_object()) fail("top level must be an object");
  if (!doc.contains("dims") || !doc["dims"].is_array() || doc["dims"].empty())
    fail("field 'dims' must be a non-empty array");
  std::vector<Party> parties;
  for (std::size_t k = 0; k < doc["dims"].size(); ++k) {
    const auto& p = doc["dims"][k];
    const std::string where = "field 'dims[" + std::to_string(k) + "]'";
    if (!p.is_object() || !p.contains("label") || !p["label"].is_string()) fail(where + " needs a string 'label'");
    if (!p.contains("dim") || !p["dim"].is_number_integer() || p["dim"].get<int>() < 1)
      fail(where + " needs a positive integer 'dim'");
    parties.push_back({p["label"].get<std::string>(), p["dim"].get<int>()});
  }
  SubsystemDims dims;
  try {
    dims = SubsystemDims(std::move(parties));
  } catch (const Error& e) {
    fail(std::string("field 'dims': ") + e.what());
  }
  bool subnormalized = false;
  if (doc.contains("subnormalized")) {
    if (!doc["subnormalized"].is_boolean()) fail("field 'subnormalized' must be a boolean");
    subnormalized = doc["subnormalized"].get<bool>();
  }
  const int n = dims.total();
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  m = read_part(doc, "matrix_re", n, m, false);
  m = read_part(doc, "matrix_im", n, m, true);
  try {
    return DensityOperator(std::move(m), std::move(dims), subnormalized);
  } catch (const Error& e) {
    fail(std::string("field 'matrix_re'/'matrix_im': ") + e.what());
  }
}

DensityOperator read_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_state_json(ss.str());
  } catch (const Error& e) {
    fail(path + ": " + e.what());
  }
}

std::string state_to_json(const DensityOperator& s) {
  json doc;
  doc["dims"] = json::array();
  for (const auto& p : s.dims().parties()) doc["dims"].push_back({{"label", p.label}, {"dim", p.dim}});
  doc["subnormalized"] = s.subnormalized();
  json re = json::array(), im = json::array();
  for (int i = 0; i < s.dim(); ++i) {
    json rr = json::array(), ii = json::array();
    for (int j = 0; j < s.dim(); ++j) {
      rr.push_back(s.matrix()(i, j).real());
      ii.push_back(s.matrix()(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  doc["matrix_re"] = re;
  doc["matrix_im"] = im;
  return doc.dump(2);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidFile, "cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw Error(ErrorCode::InvalidFile, "write to '" + tmp + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::InvalidFile, "cannot rename into '" + path + "': " + ec.message());
  }
}

}  // namespace disent
