// Python module: the file-level operations mirror the command-line surface
// (partition / plan_tau / validate / stats / generate), and partition_edges
// runs the whole pipeline on an in-memory edge list, returning the records
// directly. Stats documents come back as plain dicts in document order.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hep/metrics.hpp"
#include "hep/oracle.hpp"
#include "hep/pipeline.hpp"

namespace py = pybind11;
using namespace hep;

namespace {

py::object json_to_py(const nlohmann::ordered_json &j) {
  using value_t = nlohmann::ordered_json::value_t;
  switch (j.type()) {
    case value_t::boolean:
      return py::bool_(j.get<bool>());
    case value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case value_t::number_float:
      return py::float_(j.get<double>());
    case value_t::string:
      return py::str(j.get<std::string>());
    case value_t::array: {
      py::list out;
      for (const auto &e : j) out.append(json_to_py(e));
      return out;
    }
    case value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it)
        out[py::str(it.key())] = json_to_py(it.value());
      return out;
    }
    default:
      return py::none();
  }
}

template <class F>
auto with_id_width(unsigned width, F &&f) {
  if (width == 4) return f(vid32_t{});
  if (width == 8) return f(vid64_t{});
  throw ConfigError("id_width must be 4 or 8 (got " + std::to_string(width) + ")");
}

void apply_tau(RunConfig &cfg, const py::object &tau) {
  if (py::isinstance<py::str>(tau)) {
    std::string s = tau.cast<std::string>();
    if (s == "auto") {
      cfg.tau_auto = true;
      return;
    }
    if (s == "inf" || s == "infinity") {
      cfg.tau_infinite = true;
      return;
    }
    throw ConfigError("tau must be a positive number, inf, or 'auto' (got '" + s + "')");
  }
  double v = tau.cast<double>();
  if (std::isinf(v))
    cfg.tau_infinite = true;
  else
    cfg.tau = v;
}

RunConfig make_config(std::uint32_t k, const py::object &tau, const std::string &mode,
                      std::uint64_t memory, double alpha, double lambda,
                      std::uint64_t seed, bool instrument) {
  RunConfig cfg;
  cfg.mode = parse_mode(mode);
  cfg.k = k;
  apply_tau(cfg, tau);
  if (cfg.tau_auto && memory == 0)
    throw ConfigError("tau='auto' needs a memory budget in bytes");
  cfg.memory_budget = memory;
  cfg.alpha = alpha;
  cfg.lambda = lambda;
  cfg.seed = seed;
  cfg.instrument = instrument;
  return cfg;
}

// Assignment sink that keeps only the per-partition counts.
template <class Vid>
class CountingSink final : public AssignmentSink<Vid> {
 public:
  using AssignmentSink<Vid>::AssignmentSink;

 protected:
  void on_append(Vid, Vid, part_t) override {}
};

py::dict report_to_dict(const ValidationReport &rep) {
  py::dict d;
  d["ok"] = rep.ok;
  d["input_edges"] = rep.input_edges;
  d["records"] = rep.records;
  d["self_loops_skipped"] = rep.self_loops_skipped;
  d["missing"] = rep.missing;
  d["duplicated"] = rep.duplicated;
  d["alien"] = rep.alien;
  d["bad_partition"] = rep.bad_partition;
  d["k"] = rep.k;
  d["sizes"] = py::cast(rep.sizes);
  return d;
}

py::dict plan_to_dict(const TauPlan &plan, std::uint64_t budget, std::uint32_t k,
                      unsigned id_width) {
  py::dict d;
  d["k"] = k;
  d["id_width"] = id_width;
  d["budget_bytes"] = budget;
  d["feasible"] = plan.feasible;
  if (plan.feasible) {
    d["tau"] = std::isinf(plan.tau) ? py::object(py::str("inf")) : py::object(py::float_(plan.tau));
    d["cutoff"] = plan.cutoff;
    d["bytes"] = plan.bytes;
  }
  py::list rows;
  for (const auto &row : plan.table) {
    py::dict rj;
    rj["cutoff"] = row.cutoff;
    rj["tau"] = std::isinf(row.tau) ? py::object(py::str("inf")) : py::object(py::float_(row.tau));
    rj["column_entries"] = row.column_entries;
    rj["bytes"] = row.bytes;
    rj["feasible"] = row.feasible;
    rows.append(rj);
  }
  d["rows"] = rows;
  return d;
}

template <class Vid>
std::vector<Edge<Vid>> gen_edges(const std::string &shape, std::uint64_t n,
                                 std::uint64_t m, std::uint64_t seed, double preference) {
  if (n == 0) throw ConfigError("size must be positive");
  if (shape == "path") return gen_path<Vid>(n);
  if (shape == "star") return gen_star<Vid>(n);
  if (shape == "clique") return gen_clique<Vid>(n);
  if (shape == "grid") return gen_grid<Vid>(n);
  if (shape == "random") {
    if (m == 0) throw ConfigError("random needs m edges");
    return gen_random<Vid>(n, m, seed);
  }
  if (shape == "powerlaw") {
    if (m == 0) throw ConfigError("powerlaw needs m edges");
    if (!(preference >= 0.0 && preference <= 1.0))
      throw ConfigError("preference must lie in [0, 1]");
    return gen_power_law<Vid>(n, m, seed, preference);
  }
  throw ConfigError("unknown shape '" + shape +
                    "' (path, star, clique, grid, random, powerlaw)");
}

py::dict py_partition(const std::string &input, std::uint32_t k, const py::object &tau,
                      const std::string &mode, std::uint64_t memory, double alpha,
                      double lambda, std::uint64_t seed, const py::object &output,
                      const py::object &spill, bool keep_spill, bool instrument,
                      bool timings, unsigned id_width) {
  RunConfig cfg = make_config(k, tau, mode, memory, alpha, lambda, seed, instrument);
  std::string out_path = output.is_none() ? "" : output.cast<std::string>();
  std::string spill_path = !spill.is_none() ? spill.cast<std::string>()
                           : (!out_path.empty() ? out_path : input) + ".spill";
  return with_id_width(id_width, [&](auto tag) {
    using Vid = decltype(tag);
    FileEdgeSource<Vid> src(input);
    FileSpillStore<Vid> spill_store(spill_path, keep_spill);
    std::unique_ptr<AssignmentSink<Vid>> sink;
    FileAssignmentSink<Vid> *file_sink = nullptr;
    if (!out_path.empty()) {
      auto fs = std::make_unique<FileAssignmentSink<Vid>>(out_path, cfg.k);
      file_sink = fs.get();
      sink = std::move(fs);
    } else {
      sink = std::make_unique<CountingSink<Vid>>(cfg.k);
    }
    RunResult<Vid> r = run_partition<Vid>(src, spill_store, *sink, cfg);
    if (file_sink) file_sink->finalize();
    py::object doc = json_to_py(r.stats_json(timings));
    return doc.cast<py::dict>();
  });
}

py::tuple py_partition_edges(const std::vector<std::pair<std::uint64_t, std::uint64_t>> &edges,
                             std::uint32_t k, const py::object &tau, const std::string &mode,
                             std::uint64_t memory, double alpha, double lambda,
                             std::uint64_t seed, bool instrument, bool timings) {
  RunConfig cfg = make_config(k, tau, mode, memory, alpha, lambda, seed, instrument);
  std::vector<Edge<vid64_t>> es;
  es.reserve(edges.size());
  for (const auto &e : edges) es.push_back({e.first, e.second});
  VectorEdgeSource<vid64_t> src(es);
  VectorSpillStore<vid64_t> spill;
  VectorAssignmentSink<vid64_t> sink(cfg.k);
  RunResult<vid64_t> r = run_partition<vid64_t>(src, spill, sink, cfg);
  py::list records;
  for (const auto &rec : sink.records())
    records.append(py::make_tuple(rec.u, rec.v, rec.part));
  return py::make_tuple(records, json_to_py(r.stats_json(timings)));
}

py::dict py_plan_tau(const std::string &input, std::uint64_t memory, std::uint32_t k,
                     unsigned id_width) {
  return with_id_width(id_width, [&](auto tag) {
    using Vid = decltype(tag);
    FileEdgeSource<Vid> src(input);
    DegreeStats<Vid> st = compute_degrees(src);
    TauPlan plan = plan_tau(st, memory, k, sizeof(Vid));
    return plan_to_dict(plan, memory, k, id_width);
  });
}

py::dict py_validate(const std::string &input, const std::string &assignment) {
  return with_id_width(read_assignment_header(assignment).id_width, [&](auto tag) {
    using Vid = decltype(tag);
    FileEdgeSource<Vid> src(input);
    return report_to_dict(validate_file<Vid>(src, assignment));
  });
}

py::dict py_validate_records(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>> &edges,
    const std::vector<std::tuple<std::uint64_t, std::uint64_t, std::uint32_t>> &records,
    std::uint32_t k) {
  std::vector<Edge<vid64_t>> es;
  es.reserve(edges.size());
  for (const auto &e : edges) es.push_back({e.first, e.second});
  std::vector<AssignmentRecord<vid64_t>> recs;
  recs.reserve(records.size());
  for (const auto &r : records)
    recs.push_back({std::get<0>(r), std::get<1>(r), std::get<2>(r)});
  VectorEdgeSource<vid64_t> src(es);
  return report_to_dict(validate<vid64_t>(src, recs, k));
}

py::dict py_stats(const std::string &input, const std::string &assignment) {
  return with_id_width(read_assignment_header(assignment).id_width, [&](auto tag) {
    using Vid = decltype(tag);
    FileEdgeSource<Vid> src(input);
    DegreeStats<Vid> st = compute_degrees(src);
    AssignmentAnalysis<Vid> an = analyze_assignment_file<Vid>(assignment, st.num_vertices);
    std::vector<std::uint64_t> covers = an.cover_counts();
    py::dict d;
    d["k"] = an.k;
    d["id_width"] = sizeof(Vid);
    d["graph_vertices"] = st.num_vertices;
    d["graph_active_vertices"] = st.num_active_vertices;
    d["graph_edges"] = st.num_edges;
    d["graph_self_loops"] = st.num_self_loops;
    d["records"] = an.records;
    d["quality_replication_factor"] =
        replication_factor(an.total_replicas(), st.num_active_vertices);
    d["quality_edge_balance"] = edge_balance(an.sizes);
    d["quality_vertex_balance"] = vertex_balance(covers);
    d["quality_partition_sizes"] = py::cast(an.sizes);
    d["quality_cover_counts"] = py::cast(covers);
    py::list buckets;
    for (const auto &b : degree_bucket_report(an, st.degrees)) {
      py::dict rj;
      rj["degree_lo"] = b.lo;
      rj["degree_hi"] = b.hi;
      rj["vertices"] = b.vertices;
      rj["mean_replicas"] = b.mean_replicas;
      buckets.append(rj);
    }
    d["degree_buckets"] = buckets;
    return d;
  });
}

py::object py_generate(const std::string &shape, std::uint64_t n, const py::object &output,
                       std::uint64_t m, std::uint64_t seed, double preference,
                       unsigned id_width) {
  if (output.is_none()) {
    std::vector<Edge<vid64_t>> edges = gen_edges<vid64_t>(shape, n, m, seed, preference);
    py::list out;
    for (const auto &e : edges) out.append(py::make_tuple(e.src, e.dst));
    return out;
  }
  std::string path = output.cast<std::string>();
  return with_id_width(id_width, [&](auto tag) -> py::object {
    using Vid = decltype(tag);
    std::vector<Edge<Vid>> edges = gen_edges<Vid>(shape, n, m, seed, preference);
    write_edge_file(path, edges);
    return py::int_(edges.size());
  });
}

}  // namespace

PYBIND11_MODULE(_hep, m) {
  m.doc() = "memory-budgeted hybrid edge partitioner";
  m.attr("__version__") = "0.1.0";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PlanInfeasibleError &e) {
      PyErr_SetString(PyExc_RuntimeError, e.what());
    } catch (const ConfigError &e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IngestError &e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const IoError &e) {
      PyErr_SetString(PyExc_OSError, e.what());
    }
  });

  m.def("partition", &py_partition, py::arg("input"), py::arg("k"),
        py::arg("tau") = py::float_(1.0), py::arg("mode") = "hep", py::arg("memory") = 0,
        py::arg("alpha") = 1.05, py::arg("lambda_") = 1.1, py::arg("seed") = 42,
        py::arg("output") = py::none(), py::arg("spill") = py::none(),
        py::arg("keep_spill") = false, py::arg("instrument") = false,
        py::arg("timings") = false, py::arg("id_width") = 4,
        "Partition a binary edge-list file; returns the flat stats document. "
        "Pass output= to write an assignment file. tau accepts a positive "
        "number, float('inf'), 'inf', or 'auto' (with memory= in bytes).");

  m.def("partition_edges", &py_partition_edges, py::arg("edges"), py::arg("k"),
        py::arg("tau") = py::float_(1.0), py::arg("mode") = "hep", py::arg("memory") = 0,
        py::arg("alpha") = 1.05, py::arg("lambda_") = 1.1, py::arg("seed") = 42,
        py::arg("instrument") = false, py::arg("timings") = false,
        "Partition an in-memory list of (u, v) pairs; returns "
        "([(u, v, partition), ...], stats). Vertex ids should be dense "
        "starting near 0 — state is allocated up to the largest id.");

  m.def("plan_tau", &py_plan_tau, py::arg("input"), py::arg("memory"), py::arg("k") = 2,
        py::arg("id_width") = 4,
        "Evaluate every candidate degree threshold against a byte budget; "
        "returns the planning table.");

  m.def("validate", &py_validate, py::arg("input"), py::arg("assignment"),
        "Check an assignment file against its edge file: every edge exactly "
        "once, all partition ids in range.");

  m.def("validate_records", &py_validate_records, py::arg("edges"), py::arg("records"),
        py::arg("k"),
        "Validate in-memory (u, v, partition) records against (u, v) edges.");

  m.def("stats", &py_stats, py::arg("input"), py::arg("assignment"),
        "Measure replication factor, balance, and per-degree replication of "
        "an existing assignment file.");

  m.def("generate", &py_generate, py::arg("shape"), py::arg("n"),
        py::arg("output") = py::none(), py::arg("m") = 0, py::arg("seed") = 42,
        py::arg("preference") = 0.75, py::arg("id_width") = 4,
        "Generate a corpus graph (path, star, clique, grid, random, powerlaw). "
        "Returns the edge list, or writes output= and returns the edge count.");
}
