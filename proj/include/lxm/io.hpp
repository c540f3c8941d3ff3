#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "driver.hpp"
#include "market.hpp"

namespace lxm {

using json = nlohmann::json;

// Rationals travel as strings; plain JSON integers are tolerated on input.
inline Rational rational_from_json(const json& v) {
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw Error(Errc::InvalidInput, e.what());
    }
  }
  if (v.is_number_integer()) return Rational(v.get<long>());
  throw Error(Errc::InvalidInput, "expected a rational string, got " + v.dump());
}

inline int index_from_json(const json& v, int n, const char* what) {
  if (!v.is_number_integer()) throw Error(Errc::InvalidInput, std::string(what) + " must be an integer");
  long k = v.get<long>();
  if (k < 1 || k > n) throw Error(Errc::InvalidInput, std::string(what) + " out of range: " + std::to_string(k));
  return static_cast<int>(k - 1);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidInput, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidInput, path + ": " + e.what());
  }
}

inline Market market_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("utilities"))
    throw Error(Errc::InvalidInput, "instance needs \"n\" and \"utilities\"");
  if (!j["n"].is_number_integer() || j["n"].get<long>() < 1) throw Error(Errc::InvalidInput, "n must be >= 1");
  const int n = j["n"].get<int>();
  Market mk(n);
  std::set<Edge> seen;
  for (const auto& e : j["utilities"]) {
    int i = index_from_json(e.at("i"), n, "i");
    int g = index_from_json(e.at("j"), n, "j");
    if (!seen.insert({i, g}).second)
      throw Error(Errc::InvalidInput, "duplicate utility (" + std::to_string(i + 1) + "," + std::to_string(g + 1) + ")");
    mk.set_utility(i, g, rational_from_json(e.at("u")));
  }
  return mk;
}

inline json market_to_json(const Market& mk) {
  json u = json::array();
  for (const auto& [i, j] : mk.edges()) u.push_back({{"i", i + 1}, {"j", j + 1}, {"u", to_string(mk.u(i, j))}});
  return {{"n", mk.n()}, {"utilities", u}};
}

// Either {"edges": [...]} or a bare array; entries are {"i","j"} or [i, j].
inline EdgeSet edges_from_json(const json& j, const Market& mk) {
  const json& list = j.is_object() ? j.at("edges") : j;
  if (!list.is_array()) throw Error(Errc::InvalidInput, "edge list must be an array");
  const int n = mk.n();
  EdgeSet F(n);
  for (const auto& e : list) {
    int i, g;
    if (e.is_array() && e.size() == 2) {
      i = index_from_json(e[0], n, "i");
      g = index_from_json(e[1], n, "j");
    } else {
      i = index_from_json(e.at("i"), n, "i");
      g = index_from_json(e.at("j"), n, "j");
    }
    if (!mk.has_edge(i, g))
      throw Error(Errc::InvalidInput, "edge (" + std::to_string(i + 1) + ",g" + std::to_string(g + 1) + ") not in E");
    F.insert(i, g);
  }
  return F;
}

inline json edges_to_json(const std::vector<Edge>& es) {
  json a = json::array();
  for (const auto& [i, j] : es) a.push_back({{"i", i + 1}, {"j", j + 1}});
  return a;
}

inline json prices_to_json(const Vec& p) {
  json a = json::array();
  for (const auto& v : p) a.push_back(to_string(v));
  return a;
}

inline Vec prices_from_json(const json& j, int n) {
  const json& list = j.is_object() ? j.at("prices") : j;
  if (!list.is_array() || static_cast<int>(list.size()) != n)
    throw Error(Errc::InvalidInput, "expected " + std::to_string(n) + " prices");
  Vec p;
  for (const auto& v : list) p.push_back(rational_from_json(v));
  return p;
}

inline json flow_to_json(const Flow& f) {
  json a = json::array();
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j < f.n(); ++j)
      if (f(i, j) != 0) a.push_back({{"i", i + 1}, {"j", j + 1}, {"f", to_string(f(i, j))}});
  return a;
}

inline Flow flow_from_json(const json& list, int n) {
  if (!list.is_array()) throw Error(Errc::InvalidInput, "flow must be an array");
  Flow f(n);
  std::set<Edge> seen;
  for (const auto& e : list) {
    int i = index_from_json(e.at("i"), n, "i");
    int g = index_from_json(e.at("j"), n, "j");
    if (!seen.insert({i, g}).second) throw Error(Errc::InvalidInput, "duplicate flow entry");
    f(i, g) = rational_from_json(e.at("f"));
  }
  return f;
}

inline const char* boost_tag_name(BoostResult::Tag t) {
  return t == BoostResult::Tag::FEquilibrium ? "FEquilibrium" : "Approx";
}

inline json report_to_json(const SolveReport& r) {
  json cycles = json::array();
  for (const auto& c : r.cycles)
    cycles.push_back({{"block", c.block},
                      {"f_size", c.f_size},
                      {"components", c.components},
                      {"boost", boost_tag_name(c.boost)},
                      {"dm_phases", c.dm_phases},
                      {"added", edges_to_json(c.added)}});
  return {{"prices", prices_to_json(r.p)},
          {"flow", flow_to_json(r.f)},
          {"revealed_edges", edges_to_json(r.F.list())},
          {"cycles", cycles}};
}

inline json trace_to_json(const PhaseTrace& t) {
  json S = json::array(), G = json::array(), steps = json::array();
  for (int i : t.S) S.push_back(i + 1);
  for (int j : t.gamma_goods) G.push_back(j + 1);
  for (const auto& s : t.steps) {
    json o = {{"x", to_string(s.x)}, {"event", dm_event_name(s.event)}, {"s1_after", to_string(s.s1_after)}};
    if (s.a >= 0) o["edge"] = {s.a + 1, s.b + 1};
    steps.push_back(o);
  }
  json o = {{"phase", t.index},
            {"kind", t.kind == PhaseTrace::Kind::PriceRise ? "PriceRise" : "Balancing"},
            {"S", S},
            {"gamma", G},
            {"x", to_string(t.x)},
            {"event", dm_event_name(t.event)},
            {"prod_before", to_string(t.prod_before)},
            {"prod_after", to_string(t.prod_after)},
            {"c2_before", to_string(t.c2_before)},
            {"c2_after", to_string(t.c2_after)},
            {"s1_before", to_string(t.s1_before)},
            {"s1_after", to_string(t.s1_after)},
            {"max_bits", t.max_bits},
            {"repeat", t.repeat},
            {"steps", steps}};
  if (t.a >= 0) o["edge"] = {t.a + 1, t.b + 1};
  return o;
}

inline std::string linear_text(const Vec& a, const char* var) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c] == 0) continue;
    Rational mag = abs(a[c]);
    if (first) os << (a[c] < 0 ? "-" : "");
    else os << (a[c] < 0 ? " - " : " + ");
    if (mag != 1) os << to_string(mag) << " ";
    os << var << c + 1;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

inline json pf_to_json(const PFSystem& pf) {
  json mbb_rows = json::array(), M = json::array();
  for (const auto& r : pf.mbb_rows) {
    Vec a(pf.t, Rational(0));
    a[r.pos] += r.cpos;
    a[r.neg] -= r.cneg;
    mbb_rows.push_back({{"agent", r.agent + 1},
                        {"good_out", r.good_out + 1},
                        {"good_in", r.good_in + 1},
                        {"coeffs", prices_to_json(a)},
                        {"text", linear_text(a, "pbar") + " <= 0"}});
  }
  for (int i = 0; i < pf.t; ++i)
    M.push_back({{"coeffs", prices_to_json(pf.M[i])},
                 {"rhs", to_string(pf.gamma[i])},
                 {"text", linear_text(pf.M[i], "pbar") + " <= " + to_string(pf.gamma[i])}});
  return {{"t", pf.t},
          {"mbb_rows", mbb_rows},
          {"balance_rows", M},
          {"gamma", prices_to_json(pf.gamma)},
          {"lambda", prices_to_json(pf.lambda)},
          {"B", to_string(pf.B)}};
}

inline json approx_to_json(const ApproxSystem& ap) {
  json t1 = json::array(), kap = json::array(), vr = json::array(), groups = json::array();
  for (const auto& r : ap.t1_rows)
    t1.push_back({{"i", r.i + 1}, {"coeffs", prices_to_json(r.a)}, {"rhs", to_string(r.rhs)},
                  {"text", linear_text(r.a, "pbar") + " <= " + to_string(r.rhs)}});
  for (const auto& r : ap.kappa_rows)
    kap.push_back({{"i", r.i + 1}, {"kappa", to_string(r.kappa)},
                   {"text", "pbar" + std::to_string(r.i + 1) + " <= " + to_string(r.kappa)}});
  for (const auto& r : ap.v_rows)
    vr.push_back({{"i", r.i + 1}, {"j", r.j + 1}, {"coeffs", prices_to_json(r.v)}, {"delta", to_string(r.delta)},
                  {"text", linear_text(r.v, "pbar") + " >= " + to_string(r.delta)}});
  for (int g : ap.group) groups.push_back(g);
  json removed = json::array();
  for (int i : ap.removed) removed.push_back(i + 1);
  return {{"t1_rows", t1}, {"kappa_rows", kap}, {"v_rows", vr}, {"group", groups}, {"removed", removed}};
}

}  // namespace lxm
