// Command-line front end: partition an edge list, plan a degree threshold
// for a memory budget, validate or measure an existing assignment, and
// generate corpus graphs. One pipeline run per invocation; exit codes are
// 0 success, 1 validation/configuration failure, 2 infeasible plan,
// 3 I/O failure, 4 internal invariant violation.

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hep/metrics.hpp"
#include "hep/oracle.hpp"
#include "hep/pipeline.hpp"

using namespace hep;

namespace {

// ---------------------------------------------------------------------------
// Small parsing and formatting helpers.

std::string fmt_double(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

struct TauSpec {
  bool is_auto = false;
  bool is_inf = false;
  double value = 0.0;
};

TauSpec parse_tau_spec(const std::string &s) {
  TauSpec t;
  if (s == "auto") {
    t.is_auto = true;
    return t;
  }
  if (s == "inf" || s == "infinity") {
    t.is_inf = true;
    return t;
  }
  char *end = nullptr;
  t.value = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !(t.value > 0.0) || std::isnan(t.value))
    throw ConfigError("tau must be a positive real, 'inf', or 'auto' (got '" + s + "')");
  if (std::isinf(t.value)) {
    t.is_inf = true;
    t.value = 0.0;
  }
  return t;
}

// "280B", "64KB", "1.5MB", "2GB", or a bare byte count; K/M/G are powers
// of 1024.
std::uint64_t parse_memory(const std::string &s) {
  char *end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !(v > 0.0) || std::isnan(v) || std::isinf(v))
    throw ConfigError("bad memory budget '" + s + "'");
  std::string suffix(end);
  for (auto &c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  double mult = 1.0;
  if (suffix.empty() || suffix == "B")
    mult = 1.0;
  else if (suffix == "KB" || suffix == "K")
    mult = 1024.0;
  else if (suffix == "MB" || suffix == "M")
    mult = 1024.0 * 1024.0;
  else if (suffix == "GB" || suffix == "G")
    mult = 1024.0 * 1024.0 * 1024.0;
  else
    throw ConfigError("bad memory suffix '" + suffix + "' (use B, KB, MB, or GB)");
  double bytes = v * mult;
  if (bytes < 1.0 || bytes > 9e18)
    throw ConfigError("memory budget out of range: " + s);
  return static_cast<std::uint64_t>(bytes);
}

// Writes a text document to a path, or to stdout for "-".
void write_text(const std::string &path, const std::string &text) {
  if (path == "-") {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::FILE *f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot create " + path);
  bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  ok = (std::fclose(f) == 0) && ok;
  if (!ok) throw IoError("write failure on " + path);
}

// Instantiates a callable for the requested vertex-id width.
template <class F>
int with_id_width(unsigned width, F &&f) {
  if (width == 4) return f(vid32_t{});
  if (width == 8) return f(vid64_t{});
  throw ConfigError("id width must be 4 or 8 (got " + std::to_string(width) + ")");
}

// Assignment sink that keeps only the per-partition counts.
template <class Vid>
class NullAssignmentSink final : public AssignmentSink<Vid> {
 public:
  using AssignmentSink<Vid>::AssignmentSink;

 protected:
  void on_append(Vid, Vid, part_t) override {}
};

// ---------------------------------------------------------------------------
// partition

struct PartitionArgs {
  std::string input;
  std::string output;
  std::string spill;
  std::string stats;
  std::string tau = "1";
  std::string memory;
  std::string mode = "hep";
  std::uint32_t k = 2;
  double alpha = 1.05;
  double lambda = 1.1;
  std::uint64_t seed = 42;
  unsigned id_width = 4;
  bool keep_spill = false;
  bool instrument = false;
  bool no_timings = false;
};

RunConfig make_run_config(const PartitionArgs &a) {
  RunConfig cfg;
  cfg.mode = parse_mode(a.mode);
  cfg.k = a.k;
  TauSpec t = parse_tau_spec(a.tau);
  cfg.tau_auto = t.is_auto;
  cfg.tau_infinite = t.is_inf;
  if (!t.is_auto && !t.is_inf) cfg.tau = t.value;
  if (t.is_auto && a.memory.empty())
    throw ConfigError("--tau auto needs a --memory budget");
  if (!a.memory.empty()) cfg.memory_budget = parse_memory(a.memory);
  cfg.alpha = a.alpha;
  cfg.lambda = a.lambda;
  cfg.seed = a.seed;
  cfg.instrument = a.instrument;
  return cfg;
}

template <class Vid>
void print_run_summary(const RunResult<Vid> &r) {
  const RunConfig &c = r.config;
  std::string tau_line = c.tau_auto ? "auto -> " + fmt_double(r.tau_effective) +
                                          " (cutoff " + std::to_string(r.plan.cutoff) + ")"
                                    : fmt_double(r.tau_effective);
  std::printf("%-10s %s  k=%u  tau=%s  alpha=%s\n", "run", mode_name(c.mode), c.k,
              tau_line.c_str(), fmt_double(c.alpha).c_str());
  std::printf("%-10s %" PRIu64 " vertices (%" PRIu64 " active), %" PRIu64
              " edges, %" PRIu64 " self-loops skipped, mean degree %.4f\n",
              "graph", r.num_vertices, r.num_active_vertices, r.num_edges,
              r.num_self_loops, r.mean_degree);
  if (c.mode == Mode::reference_ne) {
    std::printf("%-10s whole graph held in memory (no degree split)\n", "split");
  } else {
    std::printf("%-10s %" PRIu64 " high-degree vertices (threshold degree %" PRIu64
                "), %" PRIu64 " column entries, %" PRIu64 " edges spilled\n",
                "split", r.high_count, r.threshold_degree, r.column_entries,
                r.spilled_edges);
    std::printf("%-10s estimate %" PRIu64 " B; measured column %" PRIu64
                " B + index %" PRIu64 " B + sizes %" PRIu64 " B + bitsets %" PRIu64 " B\n",
                "memory", r.estimated_bytes, r.measured_column_bytes,
                r.measured_index_bytes, r.measured_size_field_bytes,
                r.measured_bitset_bytes);
  }
  std::printf("%-10s capacity %" PRIu64 ", cleaned %" PRIu64 " of %" PRIu64
              " entries (%.2f%%), %" PRIu64 " spilled over, %" PRIu64
              " reconciled, %" PRIu64 " by final sweep%s\n",
              "expansion", r.capacity, r.nepp.cleaned_entries,
              r.nepp.initial_column_entries, 100.0 * r.nepp.cleaned_fraction(),
              r.nepp.spill_over_edges, r.nepp.reconciled_edges,
              r.nepp.remaining_assigned,
              r.nepp.exhausted_early ? " (exhausted early)" : "");
  if (c.instrument)
    std::printf("%-10s core rereads %" PRIu64 ", stale degree counts %" PRIu64
                ", cleanup residue %" PRIu64 "\n",
                "checks", r.nepp.core_reread_violations, r.nepp.dext_recount_mismatches,
                r.nepp.cleanup_residue);
  if (c.mode != Mode::reference_ne)
    std::printf("%-10s %" PRIu64 " edges, %" PRIu64 " fallback assignments\n",
                "streaming", r.streamed_edges, r.fallback_count);
  std::uint64_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < r.sizes.size(); ++i) {
    if (i == 0 || r.sizes[i] < lo) lo = r.sizes[i];
    if (r.sizes[i] > hi) hi = r.sizes[i];
  }
  std::printf("%-10s rf %.6f, edge balance %.6f, vertex balance %.6f, sizes %" PRIu64
              "..%" PRIu64 "\n",
              "quality", r.replication_factor, r.edge_balance, r.vertex_balance, lo, hi);
  std::printf("%-10s total %.3f s = degrees %.3f + build %.3f + expansion %.3f + streaming %.3f\n",
              "timing", r.t_total, r.t_degrees, r.t_build, r.t_expand, r.t_stream);
}

template <class Vid>
int cmd_partition(const PartitionArgs &a) {
  RunConfig cfg = make_run_config(a);
  FileEdgeSource<Vid> input(a.input);
  std::string spill_path =
      !a.spill.empty() ? a.spill
                       : (!a.output.empty() ? a.output : a.input) + ".spill";
  FileSpillStore<Vid> spill(spill_path, a.keep_spill);

  std::unique_ptr<AssignmentSink<Vid>> sink;
  FileAssignmentSink<Vid> *file_sink = nullptr;
  if (!a.output.empty()) {
    auto fs = std::make_unique<FileAssignmentSink<Vid>>(a.output, cfg.k);
    file_sink = fs.get();
    sink = std::move(fs);
  } else {
    sink = std::make_unique<NullAssignmentSink<Vid>>(cfg.k);
  }

  RunResult<Vid> r = run_partition<Vid>(input, spill, *sink, cfg);
  if (file_sink) file_sink->finalize();

  print_run_summary(r);
  if (!a.output.empty())
    std::printf("%-10s %" PRIu64 " records -> %s\n", "output", sink->total(),
                a.output.c_str());
  else
    std::printf("%-10s %" PRIu64 " records (discarded; pass --output to keep them)\n",
                "output", sink->total());
  if (a.keep_spill)
    std::printf("%-10s %" PRIu64 " edges -> %s\n", "spill", r.streamed_edges,
                spill_path.c_str());
  if (!a.stats.empty())
    write_text(a.stats, r.stats_json(!a.no_timings).dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// plan-tau

struct PlanArgs {
  std::string input;
  std::string memory;
  std::string stats;
  std::uint32_t k = 2;
  unsigned id_width = 4;
};

nlohmann::ordered_json plan_json(const TauPlan &plan, std::uint64_t budget,
                                 std::uint32_t k, unsigned id_width, double secs) {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["id_width"] = id_width;
  j["budget_bytes"] = budget;
  j["feasible"] = plan.feasible;
  if (plan.feasible) {
    if (std::isinf(plan.tau))
      j["tau"] = "inf";
    else
      j["tau"] = plan.tau;
    j["cutoff"] = plan.cutoff;
    j["bytes"] = plan.bytes;
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto &row : plan.table) {
    nlohmann::ordered_json rj;
    rj["cutoff"] = row.cutoff;
    if (std::isinf(row.tau))
      rj["tau"] = "inf";
    else
      rj["tau"] = row.tau;
    rj["column_entries"] = row.column_entries;
    rj["bytes"] = row.bytes;
    rj["feasible"] = row.feasible;
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  j["timing_plan_s"] = secs;
  return j;
}

void print_plan_table(const TauPlan &plan, std::uint64_t budget) {
  std::printf("%10s %12s %14s %14s  %s\n", "cutoff", "tau", "column entries",
              "bytes", "fits");
  for (const auto &row : plan.table)
    std::printf("%10" PRIu64 " %12s %14" PRIu64 " %14" PRIu64 "  %-3s%s\n",
                row.cutoff, fmt_double(row.tau).c_str(), row.column_entries,
                row.bytes, row.feasible ? "yes" : "no",
                (plan.feasible && row.cutoff == plan.cutoff) ? "  <- chosen" : "");
  if (plan.feasible)
    std::printf("tau %s (cutoff %" PRIu64 ") fits %" PRIu64 " of %" PRIu64
                " budget bytes\n",
                fmt_double(plan.tau).c_str(), plan.cutoff, plan.bytes, budget);
  else if (budget > 0)
    std::printf("infeasible: fixed per-vertex state alone needs %" PRIu64
                " bytes, budget is %" PRIu64 "\n",
                plan.bytes, budget);
  else
    std::printf("infeasible: fixed per-vertex state alone needs %" PRIu64 " bytes\n",
                plan.bytes);
}

template <class Vid>
int cmd_plan_tau(const PlanArgs &a) {
  std::uint64_t budget = parse_memory(a.memory);
  FileEdgeSource<Vid> input(a.input);
  Timer t;
  DegreeStats<Vid> stats = compute_degrees(input);
  TauPlan plan = plan_tau(stats, budget, a.k, sizeof(Vid));
  double secs = t.seconds();
  print_plan_table(plan, budget);
  std::printf("planned %" PRIu64 " edges in %.6f s\n", stats.num_edges, secs);
  if (!a.stats.empty())
    write_text(a.stats, plan_json(plan, budget, a.k, sizeof(Vid), secs).dump(2) + "\n");
  return plan.feasible ? 0 : 2;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateArgs {
  std::string input;
  std::string assignment;
};

template <class Vid>
int cmd_validate(const ValidateArgs &a) {
  FileEdgeSource<Vid> input(a.input);
  ValidationReport rep = validate_file<Vid>(input, a.assignment);
  std::printf("%-10s %" PRIu64 " edges (%" PRIu64 " self-loops skipped)\n", "input",
              rep.input_edges, rep.self_loops_skipped);
  std::printf("%-10s %" PRIu64 " records across k=%u\n", "assignment", rep.records,
              rep.k);
  std::printf("%-10s missing %" PRIu64 ", duplicated %" PRIu64 ", alien %" PRIu64
              ", bad partition ids %" PRIu64 "\n",
              "delta", rep.missing, rep.duplicated, rep.alien, rep.bad_partition);
  std::printf("%s\n", rep.ok ? "OK" : "FAILED");
  return rep.ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::string input;
  std::string assignment;
  std::string stats;
};

template <class Vid>
int cmd_stats(const StatsArgs &a) {
  FileEdgeSource<Vid> input(a.input);
  DegreeStats<Vid> st = compute_degrees(input);
  AssignmentAnalysis<Vid> an = analyze_assignment_file<Vid>(a.assignment, st.num_vertices);
  std::vector<std::uint64_t> covers = an.cover_counts();
  double rf = replication_factor(an.total_replicas(), st.num_active_vertices);
  double eb = edge_balance(an.sizes);
  double vb = vertex_balance(covers);
  std::vector<DegreeBucketRow> buckets = degree_bucket_report(an, st.degrees);

  std::printf("%-10s %" PRIu64 " vertices (%" PRIu64 " active), %" PRIu64 " edges\n",
              "graph", st.num_vertices, st.num_active_vertices, st.num_edges);
  std::printf("%-10s %" PRIu64 " records across k=%u\n", "assignment", an.records, an.k);
  std::printf("%-10s rf %.6f, edge balance %.6f, vertex balance %.6f\n", "quality",
              rf, eb, vb);
  std::printf("%-10s", "sizes");
  for (auto s : an.sizes) std::printf(" %" PRIu64, s);
  std::printf("\n");
  std::printf("%12s %12s %16s\n", "degree", "vertices", "mean replicas");
  for (const auto &b : buckets)
    std::printf("%5" PRIu64 "..%-5" PRIu64 " %12" PRIu64 " %16.4f\n", b.lo, b.hi,
                b.vertices, b.mean_replicas);

  if (!a.stats.empty()) {
    nlohmann::ordered_json j;
    j["k"] = an.k;
    j["id_width"] = sizeof(Vid);
    j["graph_vertices"] = st.num_vertices;
    j["graph_active_vertices"] = st.num_active_vertices;
    j["graph_edges"] = st.num_edges;
    j["graph_self_loops"] = st.num_self_loops;
    j["records"] = an.records;
    j["quality_replication_factor"] = rf;
    j["quality_edge_balance"] = eb;
    j["quality_vertex_balance"] = vb;
    j["quality_partition_sizes"] = an.sizes;
    j["quality_cover_counts"] = covers;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto &b : buckets) {
      nlohmann::ordered_json rj;
      rj["degree_lo"] = b.lo;
      rj["degree_hi"] = b.hi;
      rj["vertices"] = b.vertices;
      rj["mean_replicas"] = b.mean_replicas;
      rows.push_back(std::move(rj));
    }
    j["degree_buckets"] = std::move(rows);
    write_text(a.stats, j.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string shape;
  std::string output;
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t seed = 42;
  double preference = 0.75;
  unsigned id_width = 4;
};

template <class Vid>
int cmd_gen(const GenArgs &a) {
  if (a.n == 0) throw ConfigError("size must be positive");
  if (a.shape == "grid" && a.n > (std::uint64_t{1} << 32))
    throw ConfigError("grid side too large");
  std::uint64_t max_id = std::numeric_limits<Vid>::max();
  std::uint64_t vertices = a.shape == "star" ? a.n + 1
                           : a.shape == "grid" ? a.n * a.n
                                               : a.n;
  if (vertices > 0 && vertices - 1 > max_id)
    throw ConfigError("graph needs ids up to " + std::to_string(vertices - 1) +
                      "; pass --id-width 8");

  std::vector<Edge<Vid>> edges;
  if (a.shape == "path") {
    edges = gen_path<Vid>(a.n);
  } else if (a.shape == "star") {
    edges = gen_star<Vid>(a.n);
  } else if (a.shape == "clique") {
    edges = gen_clique<Vid>(a.n);
  } else if (a.shape == "grid") {
    edges = gen_grid<Vid>(a.n);
  } else if (a.shape == "random") {
    if (a.m == 0) throw ConfigError("random needs --m edges");
    edges = gen_random<Vid>(a.n, a.m, a.seed);
  } else if (a.shape == "powerlaw") {
    if (a.m == 0) throw ConfigError("powerlaw needs --m edges");
    if (!(a.preference >= 0.0 && a.preference <= 1.0))
      throw ConfigError("--preference must lie in [0, 1]");
    edges = gen_power_law<Vid>(a.n, a.m, a.seed, a.preference);
  } else {
    throw ConfigError("unknown shape '" + a.shape +
                      "' (path, star, clique, grid, random, powerlaw)");
  }
  write_edge_file(a.output, edges);
  std::printf("wrote %zu %s edges to %s\n", edges.size(), a.shape.c_str(),
              a.output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"memory-budgeted hybrid edge partitioner"};
  app.require_subcommand(1);

  PartitionArgs pa;
  CLI::App *partition = app.add_subcommand(
      "partition", "split, expand in memory, and stream the spilled edges");
  partition->add_option("input", pa.input, "binary edge list (little-endian id pairs)")
      ->required();
  partition->add_option("-k,--k", pa.k, "number of partitions");
  partition->add_option("--tau", pa.tau,
                        "degree threshold multiplier: positive real, 'inf', or 'auto'");
  partition->add_option("--memory", pa.memory,
                        "budget for --tau auto, e.g. 280B, 64KB, 1.5MB (powers of 1024)");
  partition->add_option("--mode", pa.mode, "hep, reference-ne, random, or degree-hash");
  partition->add_option("--alpha", pa.alpha, "streaming balance slack (>= 1)");
  partition->add_option("--lambda", pa.lambda, "streaming balance weight");
  partition->add_option("--seed", pa.seed, "seed for the random baseline");
  partition->add_option("--id-width", pa.id_width, "vertex id bytes: 4 or 8");
  partition->add_option("-o,--output", pa.output, "assignment file to write");
  partition->add_option("--spill", pa.spill, "spill file location");
  partition->add_flag("--keep-spill", pa.keep_spill, "keep the spill file afterwards");
  partition->add_option("--stats", pa.stats, "write a stats document ('-' for stdout)");
  partition->add_flag("--instrument", pa.instrument,
                      "enable access-order and recount checks (slow)");
  partition->add_flag("--no-timings", pa.no_timings,
                      "omit wall times from the stats document");

  PlanArgs pl;
  CLI::App *plan = app.add_subcommand(
      "plan-tau", "evaluate the memory footprint of every candidate threshold");
  plan->add_option("input", pl.input, "binary edge list")->required();
  plan->add_option("--memory", pl.memory, "budget, e.g. 280B, 64KB, 1.5MB")->required();
  plan->add_option("-k,--k", pl.k, "number of partitions");
  plan->add_option("--id-width", pl.id_width, "vertex id bytes: 4 or 8");
  plan->add_option("--stats", pl.stats, "write the table as a document ('-' for stdout)");

  ValidateArgs va;
  CLI::App *validate_cmd = app.add_subcommand(
      "validate", "check that an assignment covers the input exactly once");
  validate_cmd->add_option("input", va.input, "binary edge list")->required();
  validate_cmd->add_option("assignment", va.assignment, "assignment file")->required();

  StatsArgs sa;
  CLI::App *stats_cmd = app.add_subcommand(
      "stats", "measure replication and balance of an existing assignment");
  stats_cmd->add_option("input", sa.input, "binary edge list")->required();
  stats_cmd->add_option("assignment", sa.assignment, "assignment file")->required();
  stats_cmd->add_option("--stats", sa.stats, "write a stats document ('-' for stdout)");

  GenArgs ga;
  CLI::App *gen = app.add_subcommand("gen", "generate a corpus graph");
  gen->add_option("shape", ga.shape, "path, star, clique, grid, random, or powerlaw")
      ->required();
  gen->add_option("n", ga.n, "vertices (path/clique/random/powerlaw), leaves (star), or side (grid)")
      ->required();
  gen->add_option("output", ga.output, "edge file to write")->required();
  gen->add_option("--m", ga.m, "edges (random/powerlaw)");
  gen->add_option("--seed", ga.seed, "generator seed");
  gen->add_option("--preference", ga.preference,
                  "attachment bias for powerlaw, in [0, 1]");
  gen->add_option("--id-width", ga.id_width, "vertex id bytes: 4 or 8");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*partition)
      return with_id_width(pa.id_width, [&](auto tag) {
        return cmd_partition<decltype(tag)>(pa);
      });
    if (*plan)
      return with_id_width(pl.id_width, [&](auto tag) {
        return cmd_plan_tau<decltype(tag)>(pl);
      });
    if (*validate_cmd)
      return with_id_width(read_assignment_header(va.assignment).id_width, [&](auto tag) {
        return cmd_validate<decltype(tag)>(va);
      });
    if (*stats_cmd)
      return with_id_width(read_assignment_header(sa.assignment).id_width, [&](auto tag) {
        return cmd_stats<decltype(tag)>(sa);
      });
    if (*gen)
      return with_id_width(ga.id_width, [&](auto tag) {
        return cmd_gen<decltype(tag)>(ga);
      });
    return 1;  // unreachable: a subcommand is required
  } catch (const PlanInfeasibleError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    print_plan_table(e.plan, 0);
    return 2;
  } catch (const ConfigError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const IngestError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const IoError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const InternalError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
}
