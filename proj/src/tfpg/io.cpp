#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <set>
#include <sstream>
#include <tuple>

#include "safetk/diagnostics.hpp"
#include "safetk/format.hpp"
#include "safetk/lexer.hpp"
#include "safetk/tfpg/tfpg.hpp"

namespace safetk::tfpg {

std::string_view kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::failure:
      return "failure";
    case NodeKind::or_node:
      return "or";
    case NodeKind::and_node:
      return "and";
  }
  return "?";
}

const Edge* Tfpg::find_edge(std::string_view src, std::string_view dst) const {
  for (const Edge& e : edges) {
    if (e.src == src && e.dst == dst) return &e;
  }
  return nullptr;
}

std::vector<const Edge*> Tfpg::incoming(std::string_view dst) const {
  std::vector<const Edge*> out;
  for (const Edge& e : edges) {
    if (e.dst == dst) out.push_back(&e);
  }
  return out;
}

void Tfpg::normalize() {
  std::sort(modes.begin(), modes.end());
  if (std::adjacent_find(modes.begin(), modes.end()) != modes.end()) throw InputError("tfpg: duplicate mode");
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
  for (std::size_t i = 0; i < edges.size(); ++i) {
    Edge& e = edges[i];
    std::string where = "tfpg edge " + e.src + " -> " + e.dst + ": ";
    if (i && edges[i - 1].src == e.src && edges[i - 1].dst == e.dst) throw InputError(where + "duplicate edge");
    if (!nodes.count(e.src)) throw InputError(where + "unknown node " + e.src);
    auto dst = nodes.find(e.dst);
    if (dst == nodes.end()) throw InputError(where + "unknown node " + e.dst);
    if (dst->second == NodeKind::failure) throw InputError(where + "failure nodes take no incoming edges");
    if (e.src == e.dst) throw InputError(where + "self-loop");
    if (e.tmin < 0) throw InputError(where + "negative tmin");
    if (e.tmax && *e.tmax < e.tmin) throw InputError(where + "tmin exceeds tmax");
    if (e.modes) {
      auto& m = *e.modes;
      std::sort(m.begin(), m.end());
      m.erase(std::unique(m.begin(), m.end()), m.end());
      if (m.empty()) throw InputError(where + "empty mode set");
      for (const std::string& x : m) {
        if (!std::binary_search(modes.begin(), modes.end(), x)) throw InputError(where + "unknown mode " + x);
      }
      if (m == modes) e.modes.reset();
    }
  }
}

namespace {

std::string interval(const Edge& e) {
  return "[" + std::to_string(e.tmin) + "," + (e.tmax ? std::to_string(*e.tmax) : "inf") + "]";
}

std::string mode_list(const Edge& e) {
  if (!e.modes) return "*";
  std::string out;
  for (std::size_t i = 0; i < e.modes->size(); ++i) out += (i ? "," : "") + (*e.modes)[i];
  return out;
}

std::int64_t parse_count(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 0) throw InputError("tfpg: bad " + what + " '" + s + "'");
  return v;
}

std::vector<std::string> split_modes(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Tfpg parse_tfpg(std::string_view text) {
  TokenCursor cur(text);
  Tfpg g;
  cur.expect_word("tfpg");
  g.name = cur.expect_identifier("graph name");
  cur.expect_punct(";");
  while (!cur.at_end()) {
    if (cur.accept_word("modes")) {
      do {
        g.modes.push_back(cur.expect_identifier("mode"));
      } while (cur.accept_punct(","));
      cur.expect_punct(";");
    } else if (cur.accept_word("failure")) {
      std::string id = cur.expect_identifier("node id");
      if (!g.nodes.emplace(id, NodeKind::failure).second) cur.fail("duplicate node " + id);
      cur.expect_punct(";");
    } else if (cur.accept_word("discrepancy")) {
      std::string id = cur.expect_identifier("node id");
      NodeKind k;
      if (cur.accept_word("or")) {
        k = NodeKind::or_node;
      } else if (cur.accept_word("and")) {
        k = NodeKind::and_node;
      } else {
        cur.fail_expected("'or' or 'and'");
      }
      if (!g.nodes.emplace(id, k).second) cur.fail("duplicate node " + id);
      cur.expect_punct(";");
    } else if (cur.accept_word("edge")) {
      Edge e;
      e.src = cur.expect_identifier("source node");
      cur.expect_punct("->");
      e.dst = cur.expect_identifier("target node");
      cur.expect_punct("[");
      e.tmin = cur.expect_integer();
      cur.expect_punct(",");
      if (!cur.accept_word("inf")) e.tmax = cur.expect_integer();
      cur.expect_punct("]");
      cur.expect_punct("{");
      if (!cur.accept_punct("*")) {
        e.modes.emplace();
        do {
          e.modes->push_back(cur.expect_identifier("mode"));
        } while (cur.accept_punct(","));
      }
      cur.expect_punct("}");
      cur.expect_punct(";");
      g.edges.push_back(std::move(e));
    } else {
      cur.fail_expected("'modes', 'failure', 'discrepancy' or 'edge'");
    }
  }
  g.normalize();
  return g;
}

std::string write_tfpg(const Tfpg& g) {
  std::string out = "tfpg " + g.name + ";\n";
  if (!g.modes.empty()) {
    out += "modes ";
    for (std::size_t i = 0; i < g.modes.size(); ++i) out += (i ? ", " : "") + g.modes[i];
    out += ";\n";
  }
  out += "\n";
  for (const auto& [id, k] : g.nodes) {
    if (k == NodeKind::failure) {
      out += "failure " + id + ";\n";
    } else {
      out += "discrepancy " + id + " " + std::string(kind_name(k)) + ";\n";
    }
  }
  if (!g.edges.empty()) out += "\n";
  for (const Edge& e : g.edges) {
    out += "edge " + e.src + " -> " + e.dst + " " + interval(e) + " {" + mode_list(e) + "};\n";
  }
  return out;
}

std::string tfpg_to_xml(const Tfpg& g) {
  auto attr = [](const char* n, const std::string& v) { return std::string(" ") + n + "=\"" + xml_escape(v) + "\""; };
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<tfpg" + attr("name", g.name) + ">\n";
  for (const std::string& m : g.modes) out += "  <mode" + attr("name", m) + "/>\n";
  for (const auto& [id, k] : g.nodes) out += "  <node" + attr("id", id) + attr("kind", std::string(kind_name(k))) + "/>\n";
  for (const Edge& e : g.edges) {
    out += "  <edge" + attr("src", e.src) + attr("dst", e.dst) + attr("tmin", std::to_string(e.tmin)) +
           attr("tmax", e.tmax ? std::to_string(*e.tmax) : "inf") + attr("modes", mode_list(e)) + "/>\n";
  }
  return out + "</tfpg>\n";
}

Tfpg tfpg_from_xml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw InputError("tfpg xml: " + std::string(e.message()) + " at line " + std::to_string(e.line()));
  }
  auto root = doc.get_child_optional("tfpg");
  if (!root) throw InputError("tfpg xml: missing <tfpg> element");
  auto need = [](const pt::ptree& t, const char* what, const std::string& key) {
    auto v = t.get_optional<std::string>("<xmlattr>." + key);
    if (!v) throw InputError(std::string("tfpg xml: <") + what + "> without " + key);
    return *v;
  };
  Tfpg g;
  g.name = need(*root, "tfpg", "name");
  for (const auto& [tag, node] : *root) {
    if (tag == "mode") {
      g.modes.push_back(need(node, "mode", "name"));
    } else if (tag == "node") {
      std::string id = need(node, "node", "id");
      std::string kind = need(node, "node", "kind");
      NodeKind k;
      if (kind == "failure") {
        k = NodeKind::failure;
      } else if (kind == "or") {
        k = NodeKind::or_node;
      } else if (kind == "and") {
        k = NodeKind::and_node;
      } else {
        throw InputError("tfpg xml: node " + id + " has unknown kind '" + kind + "'");
      }
      if (!g.nodes.emplace(id, k).second) throw InputError("tfpg xml: duplicate node " + id);
    } else if (tag == "edge") {
      Edge e;
      e.src = need(node, "edge", "src");
      e.dst = need(node, "edge", "dst");
      e.tmin = parse_count(need(node, "edge", "tmin"), "tmin");
      std::string tmax = need(node, "edge", "tmax");
      if (tmax != "inf") e.tmax = parse_count(tmax, "tmax");
      std::string modes = need(node, "edge", "modes");
      if (modes != "*") e.modes = split_modes(modes);
      g.edges.push_back(std::move(e));
    } else if (tag != "<xmlattr>" && tag != "<xmlcomment>") {
      throw InputError("tfpg xml: unexpected element <" + tag + ">");
    }
  }
  g.normalize();
  return g;
}

std::string tfpg_to_dot(const Tfpg& g) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  };
  std::string out = "digraph " + quote(g.name) + " {\n  rankdir=LR;\n";
  for (const auto& [id, k] : g.nodes) {
    const char* shape = k == NodeKind::failure    ? "shape=box, style=dashed"
                        : k == NodeKind::and_node ? "shape=box"
                                                  : "shape=circle";
    out += "  " + quote(id) + " [" + shape + "];\n";
  }
  for (const Edge& e : g.edges) {
    out += "  " + quote(e.src) + " -> " + quote(e.dst) + " [label=" + quote(interval(e) + " {" + mode_list(e) + "}") +
           "];\n";
  }
  return out + "}\n";
}

}  // namespace safetk::tfpg
