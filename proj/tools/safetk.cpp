#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <tuple>

#include "../vendor/CLI11.hpp"
#include "safetk/analysis/mcs.hpp"
#include "safetk/diagnostics.hpp"
#include "safetk/fmea/fmea.hpp"
#include "safetk/format.hpp"
#include "safetk/ft/fault_tree.hpp"
#include "safetk/pipeline.hpp"
#include "safetk/tfpg/tfpg.hpp"

namespace {

using namespace safetk;

struct Settings {
  std::string model, flib, fei, cca;
  std::string out = ".";
  std::size_t max_card = 64;
  std::size_t step_bound = 0;
  std::size_t max_states = 10'000'000;
  unsigned seed = 0;
  std::vector<std::string> formats;
  std::string tle;
  bool dynamic = false;
  std::vector<std::string> properties;
  std::string properties_file;
  std::string ft_file;
  std::string tfpg_file, bind_file, input, output, to = "xml", name = "synthesized";
  std::size_t counterexamples = 1;
  std::size_t samples = 100;
};

std::string read_optional(const std::string& path) { return path.empty() ? std::string() : read_file(path); }

Extension load(const Settings& s) {
  if (s.model.empty()) throw InputError("--model is required");
  return build_extension({read_file(s.model), read_optional(s.flib), read_optional(s.fei), read_optional(s.cca)});
}

analysis::AnalysisOptions analysis_options(const Settings& s) {
  analysis::AnalysisOptions o;
  o.max_card = s.max_card;
  if (s.step_bound) o.step_bound = s.step_bound;
  o.cap.max_states = s.max_states;
  return o;
}

void write_out(const Settings& s, const std::string& name, const std::string& content) {
  std::filesystem::path dir(s.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f || !(f << content) || !f.flush()) throw InputError("cannot write " + (dir / name).string());
}

std::vector<std::string> formats_or(const Settings& s, std::vector<std::string> fallback) {
  return s.formats.empty() ? fallback : s.formats;
}

sts::Expr tle_of(const Settings& s) {
  if (s.tle.empty()) throw InputError("--tle is required");
  return sts::parse_expr(s.tle);
}

analysis::CutSetResult run_mcs(const Settings& s, const Extension& ext) {
  analysis::CutSetResult r = analysis::compute_mcs(ext.xm, tle_of(s), analysis_options(s));
  if (r.nominal_reachable) std::cerr << "safetk: warning: the top level event is reachable without any fault\n";
  return r;
}

ft::FaultTree build_tree(const Settings& s, const Extension& ext) {
  analysis::CutSetResult r = run_mcs(s, ext);
  if (!s.dynamic) return ft::build_fault_tree(r, nullptr, ext.xm, s.tle);
  auto seqs = analysis::compute_cut_sequences(ext.xm, r.tle, r, analysis_options(s));
  return ft::build_fault_tree(r, &seqs, ext.xm, s.tle);
}

int cmd_extend(const Settings& s) {
  Extension ext = load(s);
  write_out(s, "extended.smx", sts::print_model(ext.xm.model));
  write_out(s, "events.tsv", fault::format_registry(ext.xm));
  return 0;
}

int cmd_mcs(const Settings& s) {
  Extension ext = load(s);
  analysis::CutSetResult r = run_mcs(s, ext);
  for (const std::string& f : formats_or(s, {"tsv"})) {
    write_out(s, "mcs." + f, f == "xml" ? analysis::format_mcs_xml(r) : analysis::format_mcs_tsv(r));
  }
  return 0;
}

ft::ExportFormat ft_format(const std::string& f) {
  if (f == "xml") return ft::ExportFormat::xml;
  if (f == "dot") return ft::ExportFormat::dot;
  return ft::ExportFormat::tsv;
}

int cmd_ft(const Settings& s) {
  Extension ext = load(s);
  ft::FaultTree tree = build_tree(s, ext);
  for (const std::string& f : formats_or(s, {"xml"})) write_out(s, "ft." + f, ft::export_ft(tree, ft_format(f)));
  return 0;
}

int cmd_ftprob(const Settings& s) {
  ft::FaultTree tree;
  ft::ProbabilityAssignment pa;
  if (!s.ft_file.empty()) {
    tree = ft::import_ft_xml(read_file(s.ft_file));
    if (!s.model.empty()) {
      Extension ext = load(s);
      pa = ft::assignment_from(ext.xm, ext.common_causes);
    }
  } else {
    Extension ext = load(s);
    tree = build_tree(s, ext);
    pa = ft::assignment_from(ext.xm, ext.common_causes);
  }
  auto values = ft::evaluate_probability(tree, pa);
  std::string report = "node\tprobability\n";
  for (const ft::Node& n : tree.nodes) report += n.id + "\t" + format_real(values.at(n.id)) + "\n";
  report += "rare-event\t" + format_real(ft::rare_event_approximation(tree, pa)) + "\n";
  write_out(s, "probability.tsv", report);
  for (const std::string& f : formats_or(s, {"xml"})) write_out(s, "ft." + f, ft::export_ft(tree, ft_format(f), &values));
  ft::ProbabilityExpr e = ft::symbolic_probability(tree, pa.groups);
  write_out(s, "probability.expr", e.to_string() + "\n");
  write_out(s, "tle_probability.py", ft::render_prob_script(e, ft::ScriptDialect::python));
  write_out(s, "tle_probability.m", ft::render_prob_script(e, ft::ScriptDialect::octave));
  return 0;
}

int cmd_fmea(const Settings& s) {
  Extension ext = load(s);
  std::string text = read_optional(s.properties_file);
  for (const std::string& p : s.properties) text += "\n" + p + ";";
  std::vector<fmea::Property> props = fmea::parse_properties(text);
  if (props.empty()) throw InputError("no properties given (--property or --properties)");
  fmea::FmeaTable t = s.dynamic ? fmea::generate_dynamic_fmea(ext.xm, props, analysis_options(s))
                                : fmea::generate_fmea(ext.xm, props, analysis_options(s));
  for (const std::string& f : formats_or(s, {"tsv"})) {
    write_out(s, "fmea." + f, fmea::export_fmea(t, f == "xml" ? fmea::FmeaFormat::xml : fmea::FmeaFormat::tsv));
  }
  return 0;
}

tfpg::Tfpg read_tfpg(const std::string& path) {
  if (path.empty()) throw InputError("--tfpg is required");
  std::string text = read_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  return first != std::string::npos && text[first] == '<' ? tfpg::tfpg_from_xml(text) : tfpg::parse_tfpg(text);
}

tfpg::NodeBinding read_binding(const Settings& s) {
  if (s.bind_file.empty()) throw InputError("--bind is required");
  return tfpg::parse_binding(read_file(s.bind_file));
}

std::string render(const tfpg::Tfpg& g, const std::string& format) {
  if (format == "xml") return tfpg::tfpg_to_xml(g);
  if (format == "dot") return tfpg::tfpg_to_dot(g);
  return tfpg::write_tfpg(g);
}

std::string trace_text(const tfpg::BoundModel& bm, const sts::Trace& trace, const tfpg::Inconsistency& why) {
  std::string out = "-- " + why.node + " " + std::string(tfpg::reason_name(why.reason)) + " at step " +
                    std::to_string(why.step) + "\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += "step " + std::to_string(i) + " [" + bm.mode_names()[bm.mode(trace[i])] + "]: " +
           bm.model().format_state(trace[i]) + "\n";
  }
  return out;
}

int cmd_tfpg_check(const Settings& s) {
  tfpg::Tfpg g = read_tfpg(s.tfpg_file);
  tfpg::NodeBinding b = read_binding(s);
  Extension ext = load(s);
  tfpg::ValidationOptions opt;
  opt.step_bound = s.step_bound ? s.step_bound : 20;
  opt.max_counterexamples = s.counterexamples;
  opt.cap.max_states = s.max_states;
  tfpg::ValidationReport r = tfpg::validate_behavioral(g, b, ext.xm, opt);
  tfpg::BoundModel bm(ext.xm, b);
  if (r.complete) {
    // Independent spot check through the trace-level semantics.
    std::mt19937 rng(s.seed);
    for (std::size_t i = 0; i < s.samples; ++i) {
      auto init = bm.model().initial_states();
      if (init.empty()) break;
      sts::Trace t{init[rng() % init.size()]};
      std::size_t len = 1 + rng() % opt.step_bound;
      while (t.size() < len) {
        auto succ = bm.model().successors(t.back());
        if (succ.empty()) break;
        t.push_back(succ[rng() % succ.size()]);
      }
      if (auto why = tfpg::admits(g, bm.activation_trace(t))) {
        throw std::logic_error("sampled trace contradicts the complete verdict at " + why->node);
      }
    }
    std::cout << "complete (bound " << opt.step_bound << ")\n";
    return 0;
  }
  for (std::size_t i = 0; i < r.counterexamples.size(); ++i) {
    const auto& c = r.counterexamples[i];
    write_out(s, "counterexample_" + std::to_string(i + 1) + ".trace", trace_text(bm, c.trace, c.first));
  }
  const auto& first = r.counterexamples.front().first;
  std::cout << "incomplete: " << first.node << " " << tfpg::reason_name(first.reason) << " at step " << first.step
            << "\n";
  return 1;
}

int cmd_tfpg_convert(const Settings& s) {
  if (s.input.empty()) throw InputError("--input is required");
  Settings in = s;
  in.tfpg_file = s.input;
  std::string text = render(read_tfpg(in.tfpg_file), s.to);
  if (s.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(s.output, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) throw InputError("cannot write " + s.output);
  }
  return 0;
}

int cmd_tfpg_synth(const Settings& s) {
  Extension ext = load(s);
  sts::StateCap cap;
  cap.max_states = s.max_states;
  tfpg::Tfpg g = tfpg::synthesize_structure(ext.xm, read_binding(s), s.step_bound ? s.step_bound : 20, s.name, cap);
  for (const std::string& f : formats_or(s, {"text"})) {
    write_out(s, f == "text" ? "synthesized.tfpg" : "synthesized.tfpg." + f, render(g, f));
  }
  return 0;
}

void model_options(CLI::App* app, Settings& s) {
  app->add_option("--model", s.model, "Nominal model (.smx)");
  app->add_option("--flib", s.flib, "Fault library (.flib)");
  app->add_option("--fei", s.fei, "Fault extension instructions (.fei)");
  app->add_option("--cca", s.cca, "Common-cause specification (.cca)");
  app->add_option("--max-states", s.max_states, "Explicit-state cap")->check(CLI::PositiveNumber);
}

void output_options(CLI::App* app, Settings& s, const std::vector<std::string>& formats) {
  app->add_option("--out", s.out, "Output directory");
  if (!formats.empty()) {
    app->add_option("--format", s.formats, "Output formats (repeatable)")->check(CLI::IsMember(formats));
  }
}

void analysis_flags(CLI::App* app, Settings& s) {
  app->add_option("--max-card", s.max_card, "Largest cut set size")->check(CLI::PositiveNumber);
  app->add_option("--step-bound", s.step_bound, "Largest trace length in steps")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based safety assessment toolkit"};
  app.set_version_flag("--version", std::string(SAFETK_VERSION));
  app.set_config("--config", "", "INI configuration; command-line flags take precedence");
  app.require_subcommand(1);
  Settings s;
  app.add_option("--seed", s.seed, "Seed for sampled cross-checks");

  CLI::App* extend = app.add_subcommand("extend", "Write the fault-extended model and its event registry");
  model_options(extend, s);
  output_options(extend, s, {});

  CLI::App* mcs = app.add_subcommand("mcs", "Minimal cut sets of a top level event");
  model_options(mcs, s);
  analysis_flags(mcs, s);
  mcs->add_option("--tle", s.tle, "Top level event");
  output_options(mcs, s, {"tsv", "xml"});

  CLI::App* ftc = app.add_subcommand("ft", "Fault tree of a top level event");
  model_options(ftc, s);
  analysis_flags(ftc, s);
  ftc->add_option("--tle", s.tle, "Top level event");
  ftc->add_flag("--dynamic", s.dynamic, "Use priority-AND gates for order-dependent cut sets");
  output_options(ftc, s, {"xml", "tsv", "dot"});

  CLI::App* prob = app.add_subcommand("ftprob", "Fault tree probability, symbolic expression and scripts");
  model_options(prob, s);
  analysis_flags(prob, s);
  prob->add_option("--tle", s.tle, "Top level event");
  prob->add_option("--ft", s.ft_file, "Existing fault tree (xml) instead of --tle");
  prob->add_flag("--dynamic", s.dynamic, "Use priority-AND gates for order-dependent cut sets");
  output_options(prob, s, {"xml", "tsv", "dot"});

  CLI::App* fm = app.add_subcommand("fmea", "Failure mode and effects table");
  model_options(fm, s);
  analysis_flags(fm, s);
  fm->add_option("--property", s.properties, "Property as 'label: expression' (repeatable)");
  fm->add_option("--properties", s.properties_file, "File of 'label: expression;' entries");
  fm->add_flag("--dynamic", s.dynamic, "One row per fault set and occurrence order");
  output_options(fm, s, {"tsv", "xml"});

  CLI::App* tf = app.add_subcommand("tfpg", "Timed failure propagation graphs");
  tf->require_subcommand(1);
  CLI::App* check = tf->add_subcommand("check", "Check that a graph admits every model trace up to the bound");
  model_options(check, s);
  check->add_option("--tfpg", s.tfpg_file, "Graph (.tfpg or xml)");
  check->add_option("--bind", s.bind_file, "Node binding (.bind)");
  check->add_option("--step-bound", s.step_bound, "Largest trace length in steps (default 20)")->check(CLI::PositiveNumber);
  check->add_option("--counterexamples", s.counterexamples, "Counterexample traces to write")->check(CLI::PositiveNumber);
  check->add_option("--samples", s.samples, "Random traces re-checked after a complete verdict");
  output_options(check, s, {});

  CLI::App* conv = tf->add_subcommand("convert", "Convert between text, xml and dot");
  conv->add_option("--input", s.input, "Graph (.tfpg or xml)");
  conv->add_option("--to", s.to, "Target format")->check(CLI::IsMember({"text", "xml", "dot"}));
  conv->add_option("--output", s.output, "Output file (default: standard output)");

  CLI::App* synth = tf->add_subcommand("synth", "Synthesize the graph structure from a model and binding");
  model_options(synth, s);
  synth->add_option("--bind", s.bind_file, "Node binding (.bind)");
  synth->add_option("--step-bound", s.step_bound, "Largest trace length in steps (default 20)")->check(CLI::PositiveNumber);
  synth->add_option("--name", s.name, "Graph name");
  output_options(synth, s, {"text", "xml", "dot"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::vector<std::tuple<CLI::App*, const char*, int (*)(const Settings&)>> commands = {
      {extend, "extend", cmd_extend},       {mcs, "mcs", cmd_mcs},
      {ftc, "ft", cmd_ft},                  {prob, "ftprob", cmd_ftprob},
      {fm, "fmea", cmd_fmea},               {check, "tfpg check", cmd_tfpg_check},
      {conv, "tfpg convert", cmd_tfpg_convert}, {synth, "tfpg synth", cmd_tfpg_synth},
  };
  for (const auto& [sub, name, run] : commands) {
    if (!sub->parsed()) continue;
    try {
      return run(s);
    } catch (const InputError& e) {
      std::cerr << "safetk " << name << ": error: " << e.what() << "\n";
      return 2;
    } catch (const ResourceError& e) {
      std::cerr << "safetk " << name << ": resource limit: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      std::cerr << "safetk " << name << ": internal error: " << e.what() << "\n";
      return 2;
    }
  }
  return 2;
}
