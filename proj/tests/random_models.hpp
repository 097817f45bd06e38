#pragma once

#include <random>
#include <string>

// Random small extended-model sources for oracle comparisons. Each model has
// one boolean component per fault event plus a saturating counter driven by
// two components, and a random DNF top-level event.
struct RandomModel {
  std::string smx;
  std::string fei;
  std::string tle;
  int events = 0;
};

inline RandomModel make_random_model(unsigned seed, int events) {
  std::mt19937 rng(seed);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  RandomModel r;
  r.events = events;
  std::string smx = "MODULE rnd" + std::to_string(seed) + "\nVAR\n";
  for (int i = 0; i < events; ++i) smx += "  c" + std::to_string(i) + " : boolean;\n";
  smx += "  h : 0..2;\nINIT\n  h = 0";
  for (int i = 0; i < events; ++i) smx += " & c" + std::to_string(i) + " = TRUE";
  smx += ";\nTRANS\n";
  for (int i = 0; i < events; ++i) {
    // Some components recover when their neighbour is healthy.
    if (pick(3) == 0 && events > 1) {
      smx += "  next(c" + std::to_string(i) + ") = (c" + std::to_string((i + 1) % events) + " | c" +
             std::to_string(i) + ");\n";
    } else {
      smx += "  next(c" + std::to_string(i) + ") = TRUE;\n";
    }
  }
  int u = pick(events);
  int v = pick(events);
  smx += "  next(h) = (!c" + std::to_string(u) + " & " + (pick(2) ? "!" : "") + "c" + std::to_string(v) +
         " ? min(h + 1, 2) : h);\n";
  r.smx = smx;

  static const char* kTemplates[] = {"stuck_at(FALSE)", "inverted"};
  static const char* kDynamics[] = {"permanent", "permanent", "transient", "sporadic"};
  for (int i = 0; i < events; ++i) {
    r.fei += "fault f" + std::to_string(i) + ": target c" + std::to_string(i) + ", template " +
             kTemplates[pick(2)] + ", dynamics " + kDynamics[pick(4)] + ", prob 0.01;\n";
  }

  int terms = 1 + pick(4);
  for (int t = 0; t < terms; ++t) {
    if (t) r.tle += " | ";
    int lits = 1 + pick(3);
    r.tle += "(";
    for (int l = 0; l < lits; ++l) {
      if (l) r.tle += " & ";
      if (pick(6) == 0) {
        r.tle += "h = 2";
      } else {
        r.tle += "!c" + std::to_string(pick(events));
      }
    }
    r.tle += ")";
  }
  return r;
}
