#include "safetk/fmea/fmea.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <map>
#include <set>
#include <sstream>

#include "safetk/diagnostics.hpp"
#include "safetk/format.hpp"
#include "safetk/lexer.hpp"
#include "safetk/sts/model.hpp"

namespace safetk::fmea {

using analysis::CutSet;
using analysis::Order;

bool Property::operator==(const Property& o) const { return label == o.label && expr == o.expr; }

namespace {

bool subset(const CutSet& a, const CutSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

struct PerProperty {
  analysis::CutSetResult result;
  std::set<CutSet> minimal;
};

std::vector<PerProperty> analyse(const fault::ExtendedModel& xm, const std::vector<Property>& properties,
                                 const analysis::AnalysisOptions& opt, FmeaTable& table) {
  std::set<std::string> labels;
  for (const Property& p : properties) {
    if (!labels.insert(p.label).second) throw InputError("duplicate property label " + p.label);
  }
  table.properties = properties;
  table.max_card = opt.max_card;
  table.step_bound = opt.step_bound;
  std::vector<PerProperty> out;
  for (const Property& p : properties) {
    PerProperty pp{analysis::compute_mcs(xm, p.expr, opt), {}};
    pp.minimal.insert(pp.result.mcs.begin(), pp.result.mcs.end());
    table.complete = table.complete && pp.result.complete;
    out.push_back(std::move(pp));
  }
  return out;
}

bool covers(const PerProperty& pp, const CutSet& c) {
  return std::any_of(pp.result.mcs.begin(), pp.result.mcs.end(), [&](const CutSet& m) { return subset(m, c); });
}

void sort_rows(std::vector<FmeaRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const FmeaRow& a, const FmeaRow& b) {
    if (a.faults.size() != b.faults.size()) return a.faults.size() < b.faults.size();
    if (a.faults != b.faults) return a.faults < b.faults;
    return a.ordering < b.ordering;
  });
}

}  // namespace

FmeaTable generate_fmea(const fault::ExtendedModel& xm, const std::vector<Property>& properties,
                        const analysis::AnalysisOptions& opt) {
  FmeaTable table;
  std::vector<PerProperty> per = analyse(xm, properties, opt, table);
  std::set<CutSet> candidates;
  for (const PerProperty& pp : per) candidates.insert(pp.minimal.begin(), pp.minimal.end());
  for (const CutSet& c : candidates) {
    FmeaRow row{c, std::nullopt, {}, {}};
    for (std::size_t i = 0; i < properties.size(); ++i) {
      if (per[i].minimal.count(c)) row.minimal_for.push_back(properties[i].label);
      if (covers(per[i], c)) row.violated.push_back(properties[i].label);
    }
    table.rows.push_back(std::move(row));
  }
  sort_rows(table.rows);
  return table;
}

FmeaTable generate_dynamic_fmea(const fault::ExtendedModel& xm, const std::vector<Property>& properties,
                                const analysis::AnalysisOptions& opt) {
  FmeaTable table;
  table.dynamic = true;
  std::vector<PerProperty> per = analyse(xm, properties, opt, table);
  std::map<std::pair<CutSet, Order>, std::set<std::size_t>> minimal_for;
  for (std::size_t i = 0; i < per.size(); ++i) {
    for (const analysis::CutSequence& s :
         analysis::compute_cut_sequences(xm, properties[i].expr, per[i].result, opt)) {
      for (const Order& o : s.orders) minimal_for[{s.base, o}].insert(i);
    }
  }
  for (const auto& [key, mins] : minimal_for) {
    const auto& [c, o] = key;
    FmeaRow row{c, o, {}, {}};
    for (std::size_t i = 0; i < properties.size(); ++i) {
      bool minimal = mins.count(i) > 0;
      if (minimal) row.minimal_for.push_back(properties[i].label);
      // A proper subset may violate the property in this order too; that needs its own check.
      if (minimal || (covers(per[i], c) && analysis::order_witness(xm, properties[i].expr, o, opt))) {
        row.violated.push_back(properties[i].label);
      }
    }
    table.rows.push_back(std::move(row));
  }
  sort_rows(table.rows);
  return table;
}

namespace {

std::string join(const std::vector<std::string>& v, const char* empty) {
  if (v.empty()) return empty;
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string attr(const char* name, const std::string& v) { return std::string(" ") + name + "=\"" + xml_escape(v) + "\""; }

std::string to_tsv(const FmeaTable& t) {
  std::string out = t.dynamic ? "faults\torder\tviolated\tminimal_for\n" : "faults\tviolated\tminimal_for\n";
  for (const FmeaRow& r : t.rows) {
    out += join(r.faults, "-") + "\t";
    if (t.dynamic) out += join(r.ordering.value_or(Order{}), "-") + "\t";
    out += join(r.violated, "-") + "\t" + join(r.minimal_for, "-") + "\n";
  }
  return out;
}

std::string to_xml(const FmeaTable& t) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<fmea" + attr("dynamic", t.dynamic ? "true" : "false") +
                    attr("max-card", std::to_string(t.max_card)) +
                    attr("step-bound", t.step_bound ? std::to_string(*t.step_bound) : "none") +
                    attr("complete", t.complete ? "true" : "false") + ">\n";
  for (const Property& p : t.properties) out += "  <property" + attr("label", p.label) + attr("expr", sts::to_string(p.expr)) + "/>\n";
  for (const FmeaRow& r : t.rows) {
    out += "  <row>\n";
    for (const std::string& f : r.faults) out += "    <fault" + attr("event", f) + "/>\n";
    if (r.ordering) {
      out += "    <order>\n";
      for (const std::string& e : *r.ordering) out += "      <event" + attr("name", e) + "/>\n";
      out += "    </order>\n";
    }
    for (const std::string& v : r.violated) {
      bool minimal = std::find(r.minimal_for.begin(), r.minimal_for.end(), v) != r.minimal_for.end();
      out += "    <violates" + attr("property", v) + attr("minimal", minimal ? "true" : "false") + "/>\n";
    }
    out += "  </row>\n";
  }
  return out + "</fmea>\n";
}

}  // namespace

std::string export_fmea(const FmeaTable& table, FmeaFormat format) {
  return format == FmeaFormat::xml ? to_xml(table) : to_tsv(table);
}

FmeaTable import_fmea_xml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw InputError("fmea xml: " + std::string(e.message()) + " at line " + std::to_string(e.line()));
  }
  auto root = doc.get_child_optional("fmea");
  if (!root) throw InputError("fmea xml: missing <fmea> element");
  auto need = [](const pt::ptree& t, const char* what, const std::string& key) {
    auto v = t.get_optional<std::string>("<xmlattr>." + key);
    if (!v) throw InputError(std::string("fmea xml: <") + what + "> without " + key);
    return *v;
  };
  auto to_size = [](const std::string& s) -> std::size_t {
    try {
      return static_cast<std::size_t>(std::stoull(s));
    } catch (const std::exception&) {
      throw InputError("fmea xml: bad number '" + s + "'");
    }
  };
  FmeaTable t;
  t.dynamic = root->get<std::string>("<xmlattr>.dynamic", "false") == "true";
  t.max_card = to_size(need(*root, "fmea", "max-card"));
  std::string bound = root->get<std::string>("<xmlattr>.step-bound", "none");
  if (bound != "none") t.step_bound = to_size(bound);
  t.complete = root->get<std::string>("<xmlattr>.complete", "true") == "true";
  std::set<std::string> labels;
  for (const auto& [tag, node] : *root) {
    if (tag == "property") {
      Property p{need(node, "property", "label"), sts::parse_expr(need(node, "property", "expr"))};
      if (!labels.insert(p.label).second) throw InputError("fmea xml: duplicate property " + p.label);
      t.properties.push_back(std::move(p));
    } else if (tag == "row") {
      FmeaRow r;
      for (const auto& [ctag, c] : node) {
        if (ctag == "fault") {
          r.faults.push_back(need(c, "fault", "event"));
        } else if (ctag == "order") {
          r.ordering.emplace();
          for (const auto& [etag, e] : c) {
            if (etag == "event") r.ordering->push_back(need(e, "event", "name"));
          }
        } else if (ctag == "violates") {
          std::string label = need(c, "violates", "property");
          if (!labels.count(label)) throw InputError("fmea xml: unknown property " + label);
          r.violated.push_back(label);
          if (c.get<std::string>("<xmlattr>.minimal", "false") == "true") r.minimal_for.push_back(label);
        }
      }
      if (r.ordering.has_value() != t.dynamic) throw InputError("fmea xml: row ordering does not match table kind");
      if (r.violated.empty()) throw InputError("fmea xml: row violates no property");
      t.rows.push_back(std::move(r));
    } else if (tag != "<xmlattr>" && tag != "<xmlcomment>") {
      throw InputError("fmea xml: unexpected element <" + tag + ">");
    }
  }
  return t;
}

std::vector<Property> parse_properties(std::string_view text) {
  TokenCursor cur(text);
  std::vector<Property> out;
  std::set<std::string> labels;
  while (!cur.at_end()) {
    std::string label = cur.expect_identifier("property label");
    if (!labels.insert(label).second) cur.fail("duplicate property label " + label);
    cur.expect_punct(":");
    Property p{label, sts::parse_expr(cur)};
    cur.expect_punct(";");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace safetk::fmea
