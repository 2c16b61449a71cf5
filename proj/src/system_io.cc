#include "occsynth/system_io.h"

#include <fstream>
#include <istream>
#include <ostream>

namespace occsynth {

namespace {

using nlohmann::json;

json box_to_json(const Box& box) {
  json out = json::array();
  for (const auto& iv : box) out.push_back({iv.lo, iv.hi});
  return out;
}

Box box_from_json(const json& doc, std::size_t dim, const std::string& where) {
  if (!doc.is_array() || doc.size() != dim) {
    throw SystemFileError(where + ": box needs " + std::to_string(dim) + " intervals");
  }
  Box box;
  for (const auto& iv : doc) {
    if (!iv.is_array() || iv.size() != 2) {
      throw SystemFileError(where + ": each interval is [lo, hi]");
    }
    box.push_back({iv[0].get<double>(), iv[1].get<double>()});
  }
  return box;
}

json set_to_json(const SemialgebraicSet& set, const std::vector<std::string>& names) {
  json h = json::array();
  for (const auto& p : set.polys()) h.push_back(p.to_string(names));
  return {{"h", std::move(h)}, {"box", box_to_json(set.box())}};
}

Polynomial parse_poly(const json& text, int n, const std::vector<std::string>& names,
                      const std::string& where) {
  try {
    return Polynomial::parse(text.get<std::string>(), n, names);
  } catch (const PolynomialError& e) {
    throw SystemFileError(where + ": " + e.what());
  }
}

SemialgebraicSet set_from_json(const json& doc, int n, const std::vector<std::string>& names,
                               const std::string& where) {
  const Box box = box_from_json(doc.at("box"), n, where);
  if (!doc.contains("h")) return SemialgebraicSet::from_box(box);
  std::vector<Polynomial> polys;
  for (const auto& t : doc.at("h")) polys.push_back(parse_poly(t, n, names, where));
  return SemialgebraicSet(std::move(polys), box);
}

std::vector<std::string> default_names(int n) {
  std::vector<std::string> names;
  for (int k = 0; k < n; ++k) names.push_back("x" + std::to_string(k + 1));
  return names;
}

}  // namespace

nlohmann::json system_to_json(const SystemDescription& desc) {
  const HybridSystem& sys = desc.system;
  const auto names = default_names(sys.n);
  json doc;
  doc["n"] = sys.n;
  doc["m"] = sys.m;
  doc["variables"] = names;
  json modes = json::array();
  for (int i = 0; i < sys.mode_count(); ++i) {
    const Mode& md = sys.modes[i];
    json f = json::array();
    for (const auto& p : md.f) f.push_back(p.to_string(names));
    json g = json::array();
    for (const auto& row : md.g) {
      json r = json::array();
      for (const auto& p : row) r.push_back(p.to_string(names));
      g.push_back(std::move(r));
    }
    json entry = {{"cell", set_to_json(md.cell, names)}, {"f", std::move(f)}, {"g", std::move(g)}};
    if (i < static_cast<int>(desc.cell_moments.size()) && desc.cell_moments[i].size() > 0) {
      entry["lebesgue_moments"] = {{"degree", desc.cell_moments[i].max_degree()},
                                   {"values", desc.cell_moments[i].values()}};
    }
    modes.push_back(std::move(entry));
  }
  doc["modes"] = std::move(modes);
  doc["input_box"] = box_to_json(sys.input_box);
  doc["target"] = set_to_json(sys.target, names);
  json sw = json::array();
  for (const auto& [i, j] : sys.switches) sw.push_back({i, j});
  doc["switches"] = std::move(sw);
  return doc;
}

SystemDescription system_from_json(const nlohmann::json& doc) {
  try {
    SystemDescription desc;
    HybridSystem& sys = desc.system;
    sys.n = doc.at("n").get<int>();
    sys.m = doc.at("m").get<int>();
    if (sys.n < 1 || sys.m < 1) throw SystemFileError("n and m must be positive");
    std::vector<std::string> names = default_names(sys.n);
    if (doc.contains("variables")) {
      names = doc.at("variables").get<std::vector<std::string>>();
      if (static_cast<int>(names.size()) != sys.n) {
        throw SystemFileError("variables must list n names");
      }
    }
    const auto& modes = doc.at("modes");
    if (!modes.is_array() || modes.empty()) throw SystemFileError("modes must be a nonempty array");
    bool any_moments = false;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const auto& entry = modes[i];
      const std::string where = "mode " + std::to_string(i);
      Mode md;
      md.cell = set_from_json(entry.at("cell"), sys.n, names, where + " cell");
      const auto& f = entry.at("f");
      if (f.size() != static_cast<std::size_t>(sys.n)) {
        throw SystemFileError(where + ": f needs n entries");
      }
      for (const auto& t : f) md.f.push_back(parse_poly(t, sys.n, names, where + " f"));
      const auto& g = entry.at("g");
      if (g.size() != static_cast<std::size_t>(sys.n)) {
        throw SystemFileError(where + ": g needs n rows");
      }
      for (const auto& row : g) {
        if (row.size() != static_cast<std::size_t>(sys.m)) {
          throw SystemFileError(where + ": each g row needs m entries");
        }
        std::vector<Polynomial> r;
        for (const auto& t : row) r.push_back(parse_poly(t, sys.n, names, where + " g"));
        md.g.push_back(std::move(r));
      }
      MomentSequence leb;
      if (entry.contains("lebesgue_moments")) {
        const auto& lm = entry.at("lebesgue_moments");
        auto values = lm.at("values").get<std::vector<double>>();
        const int degree = lm.at("degree").get<int>();
        if (static_cast<int>(values.size()) != monomial_count(sys.n, degree)) {
          throw SystemFileError(where + ": lebesgue_moments has " +
                                std::to_string(values.size()) + " values, degree " +
                                std::to_string(degree) + " needs " +
                                std::to_string(monomial_count(sys.n, degree)));
        }
        leb = MomentSequence(sys.n, degree, std::move(values));
        any_moments = true;
      }
      desc.cell_moments.push_back(std::move(leb));
      sys.modes.push_back(std::move(md));
    }
    if (!any_moments) desc.cell_moments.clear();
    sys.input_box = box_from_json(doc.at("input_box"), sys.m, "input_box");
    sys.target = set_from_json(doc.at("target"), sys.n, names, "target");
    for (const auto& sw : doc.value("switches", json::array())) {
      if (!sw.is_array() || sw.size() != 2) throw SystemFileError("switches are [i, j] pairs");
      const int i = sw[0].get<int>(), j = sw[1].get<int>();
      if (i < 0 || j < 0 || i >= sys.mode_count() || j >= sys.mode_count() || i == j) {
        throw SystemFileError("switch (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") names an invalid mode pair");
      }
      sys.switches.emplace_back(i, j);
    }
    return desc;
  } catch (const json::exception& e) {
    throw SystemFileError(std::string("system file: ") + e.what());
  } catch (const ModelError& e) {
    throw SystemFileError(std::string("system file: ") + e.what());
  }
}

void write_system(const SystemDescription& desc, std::ostream& out) {
  out << system_to_json(desc).dump(2) << '\n';
}

SystemDescription read_system(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw SystemFileError(std::string("system file: ") + e.what());
  }
  return system_from_json(doc);
}

SystemDescription read_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SystemFileError("cannot open system file " + path);
  return read_system(in);
}

}  // namespace occsynth
