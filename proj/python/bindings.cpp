#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "memclust/evaluation.hpp"
#include "memclust/memory_io.hpp"

namespace py = pybind11;
using namespace memclust;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::array_t<float> to_numpy(const Matrix& m) {
    py::array_t<float> out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

Matrix to_matrix(const FloatArray& a) {
    if (a.ndim() != 2) throw Error(errc::shape_mismatch, "expected a 2-d array");
    const auto r = static_cast<std::size_t>(a.shape(0));
    const auto c = static_cast<std::size_t>(a.shape(1));
    return Matrix(r, c, std::vector<float>(a.data(), a.data() + r * c));
}

std::vector<MemoryTokens> to_memories(const std::vector<FloatArray>& arrays, const std::vector<std::string>& ids) {
    if (!ids.empty() && ids.size() != arrays.size()) throw Error(errc::invalid_argument, "ids and memories differ in length");
    std::vector<MemoryTokens> out;
    for (std::size_t i = 0; i < arrays.size(); ++i) {
        out.emplace_back(ids.empty() ? std::to_string(i) : ids[i], to_matrix(arrays[i]));
    }
    return out;
}

py::dict compressed_to_dict(const CompressedMemory& c) {
    py::list blocks;
    for (const auto& p : c.provenance) {
        py::dict b;
        b["rows"] = py::make_tuple(p.row_begin, p.row_end);
        b["cluster"] = p.cluster_id ? py::object(py::int_(*p.cluster_id)) : py::object(py::none());
        b["members"] = p.member_doc_ids;
        blocks.append(b);
    }
    py::dict d;
    d["tokens"] = to_numpy(c.rows);
    d["strategy"] = std::string(to_string(c.strategy));
    d["effective_k"] = c.effective_k;
    d["blocks"] = blocks;
    return d;
}

std::vector<Document> to_documents(const std::vector<std::pair<std::string, std::string>>& docs) {
    std::vector<Document> out;
    for (const auto& [id, text] : docs) out.push_back({id, text});
    return out;
}

}  // namespace

PYBIND11_MODULE(_memclust, m) {
    m.doc() = "Memory compression by clustering: retrieval, encoding, compression and evaluation";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result([&]() { return py::exception<Error>(m, "Error", PyExc_RuntimeError); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const auto& type = error_type.get_stored();
            py::object exc = type(e.what());
            exc.attr("code") = e.code();
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    m.def("tokenize", &tokenize, py::arg("text"));

    py::class_<Bm25Index>(m, "Bm25Index")
        .def(py::init([](const std::vector<std::pair<std::string, std::string>>& docs, double k1, double b) {
                 return Bm25Index::build(to_documents(docs), {k1, b});
             }),
             py::arg("docs"), py::arg("k1") = 1.5, py::arg("b") = 0.75)
        .def("score", &Bm25Index::score, py::arg("query"), py::arg("doc_id"))
        .def("top_n",
             [](const Bm25Index& idx, const std::string& query, std::size_t n) {
                 std::vector<std::string> ids;
                 for (const auto& d : idx.top_n(query, n)) ids.push_back(d.id);
                 return ids;
             },
             py::arg("query"), py::arg("n") = 8)
        .def("ranked",
             [](const Bm25Index& idx, const std::string& query, std::size_t n) {
                 std::vector<std::pair<std::string, double>> out;
                 for (const auto& s : idx.ranked(query, n)) out.emplace_back(s.doc.id, s.score);
                 return out;
             },
             py::arg("query"), py::arg("n") = 8)
        .def("__len__", &Bm25Index::corpus_size);

    m.def(
        "reference_encode",
        [](const std::string& text, std::size_t d_m, std::size_t d_e) {
            return to_numpy(reference_encode({"doc", text}, d_m, d_e).tokens());
        },
        py::arg("text"), py::arg("d_m") = 128, py::arg("d_e") = 2048);

    m.def(
        "kmeans",
        [](const FloatArray& points, std::size_t k, std::uint64_t seed, std::size_t n_init) {
            const auto mat = to_matrix(points);
            std::vector<std::vector<float>> pts;
            for (std::size_t r = 0; r < mat.rows(); ++r) pts.emplace_back(mat.row(r).begin(), mat.row(r).end());
            const auto res = kmeans(pts, {.k = k, .seed = seed, .n_init = n_init});
            py::array_t<double> centroids({res.k, res.dim});
            std::copy(res.centroids.begin(), res.centroids.end(), centroids.mutable_data());
            py::dict d;
            d["assignments"] = res.assignments;
            d["centroids"] = centroids;
            d["inertia"] = res.inertia;
            d["iterations"] = res.iterations;
            d["inertia_history"] = res.inertia_history;
            return d;
        },
        py::arg("points"), py::arg("k") = 4, py::arg("seed") = 0, py::arg("n_init") = 32);

    m.def(
        "compress",
        [](const std::string& strategy, const std::vector<FloatArray>& memories, std::size_t k, std::uint64_t seed,
           const std::vector<std::string>& ids) {
            const auto mems = to_memories(memories, ids);
            StrategyConfig cfg{.variant = parse_strategy(strategy), .n_retrieved = mems.size(), .k = k, .seed = seed};
            return compressed_to_dict(compress(cfg, mems));
        },
        py::arg("strategy"), py::arg("memories"), py::arg("k") = 4, py::arg("seed") = 0,
        py::arg("ids") = std::vector<std::string>{});

    m.def(
        "token_budget",
        [](const std::string& strategy, std::size_t n, std::size_t d_m, std::size_t k) {
            return token_budget({.variant = parse_strategy(strategy), .n_retrieved = n, .d_m = d_m, .k = k});
        },
        py::arg("strategy"), py::arg("n") = 8, py::arg("d_m") = 128, py::arg("k") = 4);

    m.def(
        "rouge_l",
        [](const std::string& candidate, const std::string& reference) {
            const auto s = rouge_l(candidate, reference);
            return py::make_tuple(s.precision, s.recall, s.f1);
        },
        py::arg("candidate"), py::arg("reference"));
    m.def(
        "lcs_length",
        [](const std::vector<std::string>& a, const std::vector<std::string>& b) { return lcs_length(a, b); },
        py::arg("a"), py::arg("b"));

    m.def(
        "evaluate_json",
        [](const std::string& dataset, const std::vector<std::string>& strategies, std::size_t n, std::size_t d_m,
           std::size_t k, std::size_t d_e, std::uint64_t seed, std::size_t jobs) {
            ExperimentSetup setup;
            for (const auto& s : strategies) {
                setup.strategies.push_back({.variant = parse_strategy(s), .n_retrieved = n, .d_m = d_m, .k = k, .seed = seed});
            }
            setup.encoder.d_m = d_m;
            setup.encoder.d_e = d_e;
            setup.dataset_path = dataset;
            setup.seed = seed;
            setup.jobs = jobs;
            const auto data = load_dataset(dataset);
            py::gil_scoped_release release;
            return report_to_json(run_experiment(data, setup));
        },
        py::arg("dataset"), py::arg("strategies"), py::arg("n") = 8, py::arg("d_m") = 128, py::arg("k") = 4,
        py::arg("d_e") = 2048, py::arg("seed") = 0, py::arg("jobs") = 1);

    m.def(
        "read_memory_file",
        [](const std::string& path) {
            const auto f = decode_memory_file(read_file(path));
            py::list blocks;
            for (const auto& b : f.blocks) blocks.append(to_numpy(b));
            py::dict d;
            d["blocks"] = blocks;
            d["ids"] = f.block_doc_ids;
            d["trailer"] = f.trailer_json;
            return d;
        },
        py::arg("path"));
}
