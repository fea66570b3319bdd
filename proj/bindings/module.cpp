// Python bindings for the core operations: dense linalg, rank inflation,
// adapter algebra, closed-form gradients, desk-scale training, the metric
// suite and the existence-theorem constructions.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lorma/cli.hpp"
#include "lorma/config.hpp"
#include "lorma/gradients.hpp"
#include "lorma/io.hpp"
#include "lorma/linalg.hpp"
#include "lorma/metrics.hpp"
#include "lorma/theory.hpp"
#include "lorma/trainer.hpp"

namespace py = pybind11;
using namespace lorma;

namespace {

Matrix to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw ShapeError("expected a 2-d array");
    const auto rows = static_cast<std::size_t>(arr.shape(0));
    const auto cols = static_cast<std::size_t>(arr.shape(1));
    std::vector<double> data(arr.data(), arr.data() + rows * cols);
    return Matrix(rows, cols, std::move(data));
}

py::array_t<double> to_numpy(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

using NpArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

AdapterConfig make_config(const std::string& variant, const std::string& side, int r,
                          double alpha, std::uint64_t seed) {
    return AdapterConfig{parse_variant(variant), parse_side(side), r, alpha, seed};
}

}  // namespace

PYBIND11_MODULE(_lorma, m) {
    m.doc() = "low-rank multiplicative adaptation workbench";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<RankError>(m, "RankError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<DivergenceError>(m, "DivergenceError",
                                            PyExc_ArithmeticError);

    // ---- linalg ----
    m.def("matmul", [](const NpArray& a, const NpArray& b) {
        return to_numpy(matmul(to_matrix(a), to_matrix(b)));
    });
    m.def("svd", [](const NpArray& a) {
        const SvdResult s = svd(to_matrix(a));
        return py::make_tuple(to_numpy(s.u), py::cast(s.sigma), to_numpy(s.vt));
    });
    m.def("numerical_rank",
          [](const NpArray& a) { return numerical_rank(to_matrix(a)); });
    m.def("left_pseudo_inverse",
          [](const NpArray& a) { return to_numpy(left_pseudo_inverse(to_matrix(a))); });
    m.def("eigenvalues", [](const NpArray& a) { return eigenvalues(to_matrix(a)); });
    m.def("qr", [](const NpArray& a) {
        const auto [q, r] = qr_decompose(to_matrix(a));
        return py::make_tuple(to_numpy(q), to_numpy(r));
    });

    // ---- rank inflation ----
    m.def("inflate_pi", [](const NpArray& a) { return to_numpy(inflate_pi(to_matrix(a))); });
    m.def("deflate_pi", [](const NpArray& a) { return to_numpy(deflate_pi(to_matrix(a))); });
    m.def("inflate_plus", [](const NpArray& ba, double scaling) {
        return to_numpy(inflate_plus(to_matrix(ba), scaling));
    });

    // ---- adapters ----
    py::class_<AdapterConfig>(m, "AdapterConfig")
        .def(py::init(&make_config), py::arg("variant"), py::arg("side") = "pre",
             py::arg("r") = 4, py::arg("alpha") = 4.0, py::arg("seed") = 0)
        .def_property_readonly(
            "variant", [](const AdapterConfig& c) { return to_string(c.variant); })
        .def_property_readonly(
            "side", [](const AdapterConfig& c) { return to_string(c.side); })
        .def_readonly("r", &AdapterConfig::r)
        .def_readonly("alpha", &AdapterConfig::alpha)
        .def_readonly("seed", &AdapterConfig::seed)
        .def("scaling", &AdapterConfig::scaling);

    py::class_<AdapterState>(m, "AdapterState")
        .def_property_readonly("w0",
                               [](const AdapterState& s) { return to_numpy(s.w0); })
        .def_property(
            "b", [](const AdapterState& s) { return to_numpy(s.b); },
            [](AdapterState& s, const NpArray& value) {
                Matrix m = to_matrix(value);
                require_same_shape(s.b, m, "set b");
                s.b = std::move(m);
            })
        .def_property(
            "a", [](const AdapterState& s) { return to_numpy(s.a); },
            [](AdapterState& s, const NpArray& value) {
                Matrix m = to_matrix(value);
                require_same_shape(s.a, m, "set a");
                s.a = std::move(m);
            })
        .def_readonly("config", &AdapterState::config);

    m.def("init_adapter", [](const NpArray& w0, const AdapterConfig& cfg) {
        return init_adapter(to_matrix(w0), cfg);
    });
    m.def("forward", [](const AdapterState& s, const NpArray& x) {
        return to_numpy(forward(s, to_matrix(x)));
    });
    m.def("effective_weight",
          [](const AdapterState& s) { return to_numpy(effective_weight(s)); });
    m.def("delta_w", [](const AdapterState& s) { return to_numpy(delta_w(s)); });
    m.def("adapter_transform",
          [](const AdapterState& s) { return to_numpy(adapter_transform(s)); });
    m.def("merge", [](const AdapterState& s) {
        const MergeResult r = merge(s);
        return py::make_tuple(to_numpy(r.weights), r.multiplier_invertible);
    });

    // ---- gradients ----
    m.def("backward", [](const AdapterState& s, const NpArray& x, const NpArray& g) {
        const GradientBundle b = backward(s, to_matrix(x), to_matrix(g));
        return py::make_tuple(to_numpy(b.d_b), to_numpy(b.d_a), to_numpy(b.d_x));
    });
    py::class_<GradCheckReport>(m, "GradCheckReport")
        .def_readonly("max_rel_error", &GradCheckReport::max_rel_error)
        .def_property_readonly(
            "worst_param",
            [](const GradCheckReport& r) { return std::string(1, r.worst_param); })
        .def_readonly("worst_row", &GradCheckReport::worst_row)
        .def_readonly("worst_col", &GradCheckReport::worst_col);
    m.def("grad_check",
          [](const AdapterState& s, const NpArray& x, std::uint64_t probe_seed) {
              return grad_check(s, to_matrix(x), probe_seed);
          },
          py::arg("state"), py::arg("x"), py::arg("probe_seed") = 0);

    // ---- trainer ----
    py::class_<Task>(m, "Task")
        .def_property_readonly("w0", [](const Task& t) { return to_numpy(t.w0); })
        .def_property_readonly("x", [](const Task& t) { return to_numpy(t.x); })
        .def_property_readonly("y", [](const Task& t) { return to_numpy(t.y); })
        .def_property_readonly("w_star",
                               [](const Task& t) { return to_numpy(t.w_star); });
    m.def(
        "make_task",
        [](int d, int k, const std::string& target, int target_rank, int n_train,
           double noise_std, const std::string& kind, std::uint64_t seed) {
            TaskSpec spec;
            spec.kind = parse_task_kind(kind);
            spec.d = d;
            spec.k = k;
            spec.target_kind = parse_target_kind(target);
            spec.target_rank = target_rank;
            spec.n_train = n_train;
            spec.noise_std = noise_std;
            return make_task(spec, seed);
        },
        py::arg("d"), py::arg("k"), py::arg("target") = "low_rank_delta",
        py::arg("target_rank") = 2, py::arg("n_train") = 256,
        py::arg("noise_std") = 0.0, py::arg("kind") = "target_recovery",
        py::arg("seed") = 0);

    py::class_<TrainLog>(m, "TrainLog")
        .def_readonly("step_losses", &TrainLog::step_losses)
        .def_readonly("epoch_rank_trace", &TrainLog::epoch_rank_trace)
        .def_readonly("epoch_delta_rank", &TrainLog::epoch_delta_rank)
        .def_readonly("wall_seconds", &TrainLog::wall_seconds);
    m.def(
        "train",
        [](const AdapterState& state, const Task& task, const std::string& optimizer,
           double lr, double weight_decay, const std::string& schedule,
           double warmup_ratio, int epochs, int batch, std::uint64_t seed) {
            OptimizerSpec opt;
            opt.kind = parse_optimizer_kind(optimizer);
            opt.lr = lr;
            opt.weight_decay = weight_decay;
            LrSchedule sched;
            sched.kind = parse_schedule_kind(schedule);
            sched.warmup_ratio = warmup_ratio;
            auto [trained, log] =
                train(state, task, opt, sched, TrainOptions{epochs, batch, seed});
            return py::make_tuple(trained, log);
        },
        py::arg("state"), py::arg("task"), py::arg("optimizer") = "adamw",
        py::arg("lr") = 1e-3, py::arg("weight_decay") = 0.0,
        py::arg("schedule") = "linear_warmup_decay", py::arg("warmup_ratio") = 0.06,
        py::arg("epochs") = 125, py::arg("batch") = 16, py::arg("seed") = 0);
    m.def("dataset_loss", &dataset_loss);
    m.def("loss_auc", &loss_auc);

    // ---- metrics ----
    m.def("frobenius_distance", [](const NpArray& a, const NpArray& b) {
        return frobenius_distance(to_matrix(a), to_matrix(b));
    });
    m.def("flattened_cosine", [](const NpArray& a, const NpArray& b) {
        return flattened_cosine(to_matrix(a), to_matrix(b));
    });
    m.def("top_r_singular_ssd", [](const NpArray& a, const NpArray& b, int r) {
        return top_r_singular_ssd(to_matrix(a), to_matrix(b), r);
    });
    m.def("top_r_eigen_ssd", [](const NpArray& a, const NpArray& b, int r) {
        return top_r_eigen_ssd(to_matrix(a), to_matrix(b), r);
    });
    m.def("principal_angle_theta1", [](const NpArray& a, const NpArray& b, int k) {
        return principal_angle_theta1(to_matrix(a), to_matrix(b), k);
    });
    m.def(
        "compare_updates",
        [](const NpArray& ref, const NpArray& test, int r, std::uint64_t seed) {
            const UpdateComparison cmp = compare_updates(to_matrix(ref),
                                                         to_matrix(test), r, seed);
            const auto report = [](const MetricsReport& rep) {
                py::dict d;
                d["frobenius"] = rep.frobenius;
                d["cosine"] = rep.cosine;
                d["sv_ssd_r"] = rep.sv_ssd_r;
                d["eig_ssd_r"] = rep.eig_ssd_r ? py::cast(*rep.eig_ssd_r)
                                               : py::object(py::none());
                d["theta1"] = rep.theta1;
                d["r_used"] = rep.r_used;
                return d;
            };
            py::dict out;
            out["vs_test"] = report(cmp.vs_test);
            out["vs_random"] = report(cmp.vs_random);
            return out;
        },
        py::arg("ref"), py::arg("test"), py::arg("r") = 4,
        py::arg("seed") = 0x52414e44ull);

    // ---- theory ----
    const auto cert_tuple = [](const ExistenceCertificate& c) {
        return py::make_tuple(to_numpy(c.multiplier), c.residual, c.feasible);
    };
    m.def("construct_premultiplier", [cert_tuple](const NpArray& m0, const NpArray& t) {
        return cert_tuple(construct_premultiplier(to_matrix(m0), to_matrix(t)));
    });
    m.def("best_postmultiplier", [cert_tuple](const NpArray& m0, const NpArray& t) {
        return cert_tuple(best_postmultiplier(to_matrix(m0), to_matrix(t)));
    });
    m.def("square_both_sides", [cert_tuple](const NpArray& m0, const NpArray& t) {
        const auto [pre, post] = square_both_sides(to_matrix(m0), to_matrix(t));
        return py::make_tuple(cert_tuple(pre), cert_tuple(post));
    });

    // ---- snapshots ----
    m.def("save_matrix", [](const NpArray& a, const std::filesystem::path& path) {
        save_matrix(to_matrix(a), path);
    });
    m.def("load_matrix", [](const std::filesystem::path& path) {
        return to_numpy(load_matrix(path));
    });
}
