#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <sstream>

#include "safetk/diagnostics.hpp"
#include "safetk/format.hpp"
#include "safetk/ft/fault_tree.hpp"

namespace safetk::ft {

namespace {

std::string attr(const char* name, const std::string& v) { return std::string(" ") + name + "=\"" + xml_escape(v) + "\""; }

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string value_of(const Node& n, const std::map<std::string, double>* probabilities) {
  if (!probabilities) return {};
  auto it = probabilities->find(n.id);
  return it == probabilities->end() ? std::string() : format_real(it->second);
}

std::string to_xml(const FaultTree& ft, const std::map<std::string, double>* probabilities) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<fault-tree" + attr("root", ft.root) + ">\n";
  for (const Node& n : ft.nodes) {
    std::string v = value_of(n, probabilities);
    if (n.kind == NodeKind::basic) {
      out += "  <basic-event" + attr("id", n.id) + attr("event", n.event);
      if (n.probability) out += attr("probability", format_real(*n.probability));
      out += attr("label", n.label);
      if (!v.empty()) out += attr("value", v);
      out += "/>\n";
      continue;
    }
    out += "  <gate" + attr("id", n.id) + attr("kind", kind_name(n.kind)) + attr("label", n.label);
    if (!v.empty()) out += attr("value", v);
    if (n.children.empty()) {
      out += "/>\n";
      continue;
    }
    out += ">\n";
    for (const std::string& c : n.children) out += "    <child" + attr("ref", c) + "/>\n";
    out += "  </gate>\n";
  }
  return out + "</fault-tree>\n";
}

std::string to_tsv(const FaultTree& ft, const std::map<std::string, double>* probabilities) {
  std::string out = "id\tkind\tchildren\tprobability\tlabel";
  if (probabilities) out += "\tvalue";
  out += "\n";
  for (const Node& n : ft.nodes) {
    std::string children;
    if (n.kind == NodeKind::basic) {
      children = n.event;
    } else {
      for (std::size_t i = 0; i < n.children.size(); ++i) children += (i ? "," : "") + n.children[i];
      if (children.empty()) children = "-";
    }
    out += n.id + "\t" + kind_name(n.kind) + "\t" + children + "\t" +
           (n.probability ? format_real(*n.probability) : "-") + "\t" + n.label;
    if (probabilities) {
      std::string v = value_of(n, probabilities);
      out += "\t" + (v.empty() ? "-" : v);
    }
    out += "\n";
  }
  return out;
}

std::string to_dot(const FaultTree& ft, const std::map<std::string, double>* probabilities) {
  std::string out = "digraph fault_tree {\n  rankdir=TB;\n";
  for (const Node& n : ft.nodes) {
    std::string shape;
    std::string text = n.label;
    switch (n.kind) {
      case NodeKind::basic:
        shape = "circle";
        if (n.probability) text += "\\np=" + format_real(*n.probability);
        break;
      case NodeKind::and_:
        shape = "box";
        text = "AND\\n" + text;
        break;
      case NodeKind::or_:
        shape = "invtriangle";
        text = "OR\\n" + text;
        break;
      case NodeKind::pand:
        shape = "hexagon";
        text = "PAND\\n" + text;
        break;
    }
    std::string v = value_of(n, probabilities);
    if (!v.empty()) text += "\\nP=" + v;
    std::string label = dot_quote(text);
    // dot_quote escaped the backslashes of the line breaks; restore them.
    for (std::size_t p = 0; (p = label.find("\\\\n", p)) != std::string::npos;) label.replace(p, 3, "\\n");
    out += "  " + dot_quote(n.id) + " [shape=" + shape + ", label=" + label + "];\n";
  }
  for (const Node& n : ft.nodes) {
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      out += "  " + dot_quote(n.id) + " -> " + dot_quote(n.children[i]);
      if (n.kind == NodeKind::pand) out += " [label=\"" + std::to_string(i + 1) + "\"]";
      out += ";\n";
    }
  }
  return out + "}\n";
}

}  // namespace

std::string export_ft(const FaultTree& ft, ExportFormat format, const std::map<std::string, double>* probabilities) {
  switch (format) {
    case ExportFormat::xml:
      return to_xml(ft, probabilities);
    case ExportFormat::tsv:
      return to_tsv(ft, probabilities);
    case ExportFormat::dot:
      return to_dot(ft, probabilities);
  }
  return {};
}

FaultTree import_ft_xml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw InputError("fault tree xml: " + std::string(e.message()) + " at line " + std::to_string(e.line()));
  }
  auto root = doc.get_child_optional("fault-tree");
  if (!root) throw InputError("fault tree xml: missing <fault-tree> element");
  FaultTree ft;
  ft.root = root->get<std::string>("<xmlattr>.root", "");
  auto need = [](const pt::ptree& t, const char* what, const std::string& key) {
    auto v = t.get_optional<std::string>("<xmlattr>." + key);
    if (!v) throw InputError(std::string("fault tree xml: <") + what + "> without " + key);
    return *v;
  };
  for (const auto& [tag, t] : *root) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    Node n;
    if (tag == "basic-event") {
      n.kind = NodeKind::basic;
      n.id = need(t, "basic-event", "id");
      n.event = need(t, "basic-event", "event");
      n.label = t.get<std::string>("<xmlattr>.label", n.event);
      if (auto p = t.get_optional<std::string>("<xmlattr>.probability")) {
        try {
          n.probability = std::stod(*p);
        } catch (const std::exception&) {
          throw InputError("fault tree xml: bad probability '" + *p + "' on " + n.id);
        }
      }
    } else if (tag == "gate") {
      n.id = need(t, "gate", "id");
      std::string kind = need(t, "gate", "kind");
      if (kind == "AND") {
        n.kind = NodeKind::and_;
      } else if (kind == "OR") {
        n.kind = NodeKind::or_;
      } else if (kind == "PAND") {
        n.kind = NodeKind::pand;
      } else {
        throw InputError("fault tree xml: unknown gate kind " + kind);
      }
      n.label = t.get<std::string>("<xmlattr>.label", "");
      for (const auto& [ctag, c] : t) {
        if (ctag == "child") n.children.push_back(need(c, "child", "ref"));
      }
    } else {
      throw InputError("fault tree xml: unexpected element <" + tag + ">");
    }
    if (ft.find(n.id)) throw InputError("fault tree xml: duplicate node id " + n.id);
    ft.nodes.push_back(std::move(n));
  }
  if (!ft.find(ft.root)) throw InputError("fault tree xml: root " + ft.root + " is not a node");
  for (const Node& n : ft.nodes) {
    for (const std::string& c : n.children) {
      if (!ft.find(c)) throw InputError("fault tree xml: " + n.id + " references unknown node " + c);
    }
  }
  return ft;
}

}  // namespace safetk::ft
