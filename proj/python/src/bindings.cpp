// Python bindings for the core engine: coder, learners, horde, synthetic
// stream, failure injection, and the evaluation harness. Thin pass-through
// layer; all behavior lives in the C++ library.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tdhorde/errors.hpp"
#include "tdhorde/evaluation.hpp"
#include "tdhorde/feature.hpp"
#include "tdhorde/horde.hpp"
#include "tdhorde/kanerva.hpp"
#include "tdhorde/stream.hpp"
#include "tdhorde/td.hpp"
#include "tdhorde/tidbd.hpp"

namespace py = pybind11;
using namespace tdhorde;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Online many-prediction TD(lambda) engine: selective Kanerva coding, "
            "classic and adaptive-step-size learners, synthetic sensor streams, "
            "and the evaluation harness.";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DataError>(m, "DataError");
  py::register_exception<DivergenceError>(m, "DivergenceError");
  py::register_exception<InvariantError>(m, "InvariantError");

  // --- features and coder ---------------------------------------------------

  py::class_<FeatureVector>(m, "FeatureVector")
      .def(py::init([](std::uint32_t length, std::vector<std::uint32_t> active) {
             FeatureVector x;
             x.length = length;
             x.active = std::move(active);
             x.validate();
             return x;
           }),
           py::arg("length"), py::arg("active") = std::vector<std::uint32_t>{})
      .def_readwrite("length", &FeatureVector::length)
      .def_readwrite("active", &FeatureVector::active)
      .def("validate", &FeatureVector::validate);

  py::class_<CoderConfig>(m, "CoderConfig")
      .def(py::init([](std::uint32_t dimension, std::uint32_t prototype_count, double active_ratio,
                       std::uint64_t seed) {
             return CoderConfig{dimension, prototype_count, active_ratio, seed};
           }),
           py::arg("dimension"), py::arg("prototype_count"), py::arg("active_ratio"),
           py::arg("seed") = 0)
      .def_readwrite("dimension", &CoderConfig::dimension)
      .def_readwrite("prototype_count", &CoderConfig::prototype_count)
      .def_readwrite("active_ratio", &CoderConfig::active_ratio)
      .def_readwrite("seed", &CoderConfig::seed)
      .def("active_count", &CoderConfig::active_count)
      .def("validate", &CoderConfig::validate);

  py::class_<KanervaCoder, std::shared_ptr<KanervaCoder>>(m, "KanervaCoder")
      .def(py::init<const CoderConfig&>(), py::arg("config"))
      .def("encode",
           [](const KanervaCoder& coder, const std::vector<double>& observation) {
             return coder.encode(observation);
           },
           py::arg("observation"))
      .def("with_active_ratio", &KanervaCoder::with_active_ratio, py::arg("eta"))
      .def_property_readonly("dimension", &KanervaCoder::dimension)
      .def_property_readonly("prototype_count", &KanervaCoder::prototype_count)
      .def_property_readonly("active_count", &KanervaCoder::active_count)
      .def_property_readonly("config", &KanervaCoder::config)
      .def("prototype",
           [](const KanervaCoder& coder, std::uint32_t i) {
             const std::span<const double> p = coder.prototype(i);
             return std::vector<double>(p.begin(), p.end());
           },
           py::arg("i"))
      .def("encode_calls", &KanervaCoder::encode_calls)
      .def("save_prototypes", &KanervaCoder::save_prototypes, py::arg("path"))
      .def_static("load_prototypes", &KanervaCoder::load_prototypes, py::arg("path"),
                  py::arg("config"));

  // --- learners ---------------------------------------------------------------

  py::class_<TdConfig>(m, "TdConfig")
      .def(py::init([](double step_size, double discount, double trace_decay,
                       std::uint32_t feature_count) {
             return TdConfig{step_size, discount, trace_decay, feature_count};
           }),
           py::arg("step_size"), py::arg("discount"), py::arg("trace_decay"),
           py::arg("feature_count"))
      .def_readwrite("step_size", &TdConfig::step_size)
      .def_readwrite("discount", &TdConfig::discount)
      .def_readwrite("trace_decay", &TdConfig::trace_decay)
      .def_readwrite("feature_count", &TdConfig::feature_count)
      .def("validate", &TdConfig::validate);

  py::class_<TdLearner>(m, "TdLearner")
      .def(py::init<const TdConfig&>(), py::arg("config"))
      .def("predict", &TdLearner::predict, py::arg("x"))
      .def("update", &TdLearner::update, py::arg("x_t"), py::arg("x_next"), py::arg("cumulant"))
      .def_property_readonly("config", &TdLearner::config)
      .def_property_readonly("weights", &TdLearner::weights)
      .def_property_readonly("trace", &TdLearner::trace)
      .def("state_bytes", &TdLearner::state_bytes);

  py::class_<TidbdConfig>(m, "TidbdConfig")
      .def(py::init([](double meta_step_size, double decay_time, double initial_step_size,
                       double discount, double trace_decay, std::uint32_t feature_count,
                       bool xi_consistent_form) {
             return TidbdConfig{meta_step_size, decay_time,    initial_step_size, discount,
                                trace_decay,    feature_count, xi_consistent_form};
           }),
           py::arg("meta_step_size"), py::arg("decay_time"), py::arg("initial_step_size"),
           py::arg("discount"), py::arg("trace_decay"), py::arg("feature_count"),
           py::arg("xi_consistent_form") = false)
      .def_readwrite("meta_step_size", &TidbdConfig::meta_step_size)
      .def_readwrite("decay_time", &TidbdConfig::decay_time)
      .def_readwrite("initial_step_size", &TidbdConfig::initial_step_size)
      .def_readwrite("discount", &TidbdConfig::discount)
      .def_readwrite("trace_decay", &TidbdConfig::trace_decay)
      .def_readwrite("feature_count", &TidbdConfig::feature_count)
      .def_readwrite("xi_consistent_form", &TidbdConfig::xi_consistent_form)
      .def("validate", &TidbdConfig::validate);

  py::class_<TidbdStepInfo>(m, "TidbdStepInfo")
      .def_readonly("delta", &TidbdStepInfo::delta)
      .def_readonly("normalizer", &TidbdStepInfo::normalizer);

  py::class_<StepSizeSnapshot>(m, "StepSizeSnapshot")
      .def_readonly("feature_index", &StepSizeSnapshot::feature_index)
      .def_readonly("alpha", &StepSizeSnapshot::alpha)
      .def_readonly("touched", &StepSizeSnapshot::touched);

  py::class_<TidbdLearner>(m, "TidbdLearner")
      .def(py::init<const TidbdConfig&>(), py::arg("config"))
      .def("predict", &TidbdLearner::predict, py::arg("x"))
      .def("update", &TidbdLearner::update, py::arg("x_t"), py::arg("x_next"),
           py::arg("cumulant"))
      .def_property_readonly("config", &TidbdLearner::config)
      .def_property_readonly("weights", &TidbdLearner::weights)
      .def_property_readonly("trace", &TidbdLearner::trace)
      .def_property_readonly("meta_weights", &TidbdLearner::meta_weights)
      .def_property_readonly("update_trace", &TidbdLearner::update_trace)
      .def_property_readonly("xi", &TidbdLearner::xi)
      .def_property_readonly("step_sizes", &TidbdLearner::step_sizes)
      .def("snapshot", &TidbdLearner::snapshot)
      .def("state_bytes", &TidbdLearner::state_bytes)
      .def("extra_state_bytes", &TidbdLearner::extra_state_bytes);

  // --- stream -----------------------------------------------------------------

  py::enum_<ChannelGroup>(m, "ChannelGroup")
      .value("position", ChannelGroup::position)
      .value("velocity", ChannelGroup::velocity)
      .value("load", ChannelGroup::load)
      .value("temperature", ChannelGroup::temperature)
      .value("accel", ChannelGroup::accel)
      .value("pressure", ChannelGroup::pressure)
      .value("other", ChannelGroup::other);

  py::class_<ChannelMeta>(m, "ChannelMeta")
      .def(py::init([](std::string name, double min, double max, ChannelGroup group) {
             return ChannelMeta{std::move(name), min, max, group};
           }),
           py::arg("name"), py::arg("min"), py::arg("max"),
           py::arg("group") = ChannelGroup::other)
      .def_readwrite("name", &ChannelMeta::name)
      .def_readwrite("min", &ChannelMeta::min)
      .def_readwrite("max", &ChannelMeta::max)
      .def_readwrite("group", &ChannelMeta::group);

  py::class_<StreamFrame>(m, "StreamFrame")
      .def(py::init<>())
      .def_readwrite("index", &StreamFrame::index)
      .def_readwrite("timestamp_s", &StreamFrame::timestamp_s)
      .def_readwrite("values", &StreamFrame::values);

  py::enum_<PhaseKind>(m, "PhaseKind")
      .value("rest", PhaseKind::rest)
      .value("movement", PhaseKind::movement);

  py::class_<Phase>(m, "Phase")
      .def(py::init([](PhaseKind kind, std::uint32_t steps) { return Phase{kind, steps}; }),
           py::arg("kind"), py::arg("steps"))
      .def_readwrite("kind", &Phase::kind)
      .def_readwrite("steps", &Phase::steps);

  py::enum_<FailureKind>(m, "FailureKind")
      .value("stuck", FailureKind::stuck)
      .value("broken", FailureKind::broken);

  py::class_<FailureSpec>(m, "FailureSpec")
      .def(py::init<>())
      .def_readwrite("kind", &FailureSpec::kind)
      .def_readwrite("channels", &FailureSpec::channels)
      .def_readwrite("noise_mean", &FailureSpec::noise_mean)
      .def_readwrite("noise_std", &FailureSpec::noise_std)
      .def_readwrite("seed", &FailureSpec::seed)
      .def_static("stuck", &FailureSpec::stuck, py::arg("channels"), py::arg("seed"))
      .def_static("broken", &FailureSpec::broken, py::arg("channels"), py::arg("seed"))
      .def("validate", &FailureSpec::validate, py::arg("channel_count"));

  py::class_<SynthProfile>(m, "SynthProfile")
      .def(py::init<>())
      .def_readwrite("channels", &SynthProfile::channels)
      .def_readwrite("schedule", &SynthProfile::schedule)
      .def_readwrite("step_period_s", &SynthProfile::step_period_s)
      .def_readwrite("pattern_period_s", &SynthProfile::pattern_period_s)
      .def_readwrite("rest_noise_fraction", &SynthProfile::rest_noise_fraction)
      .def_readwrite("movement_noise_fraction", &SynthProfile::movement_noise_fraction)
      .def_readwrite("temperature_rise_fraction", &SynthProfile::temperature_rise_fraction)
      .def_readwrite("drift_channel", &SynthProfile::drift_channel)
      .def_readwrite("drift_phase", &SynthProfile::drift_phase)
      .def_readwrite("drift_fraction", &SynthProfile::drift_fraction)
      .def("validate", &SynthProfile::validate);

  m.def("validate_meta", &validate_meta, py::arg("meta"));
  m.def("phase_boundaries", &phase_boundaries, py::arg("schedule"));
  m.def("default_channel_meta", &default_channel_meta);
  m.def("default_elbow_channels", &default_elbow_channels);
  m.def("default_drift_channel", &default_drift_channel);
  m.def("default_synth_profile", &default_synth_profile);
  m.def("synthesize", &synthesize, py::arg("profile"), py::arg("seed"));
  m.def("normalize", &normalize, py::arg("frame"), py::arg("meta"));
  m.def("inject_failure", &inject_failure, py::arg("frames"), py::arg("spec"),
        py::arg("channel_count"));
  m.def("load_stream_csv", &load_stream_csv, py::arg("path"), py::arg("meta"));
  m.def("write_stream_csv", &write_stream_csv, py::arg("path"), py::arg("frames"),
        py::arg("meta"));
  m.def("load_meta_csv", &load_meta_csv, py::arg("path"));
  m.def("write_meta_csv", &write_meta_csv, py::arg("path"), py::arg("meta"));

  // --- horde ------------------------------------------------------------------

  py::enum_<LearnerKind>(m, "LearnerKind")
      .value("classic_td", LearnerKind::classic_td)
      .value("tidbd", LearnerKind::tidbd);

  py::enum_<CumulantSource>(m, "CumulantSource")
      .value("normalized", CumulantSource::normalized)
      .value("raw", CumulantSource::raw);

  py::class_<GvfSpec>(m, "GvfSpec")
      .def(py::init<>())
      .def_readwrite("cumulant_channel", &GvfSpec::cumulant_channel)
      .def_readwrite("kind", &GvfSpec::kind)
      .def_readwrite("td", &GvfSpec::td)
      .def_readwrite("tidbd", &GvfSpec::tidbd)
      .def("discount", &GvfSpec::discount)
      .def("trace_decay", &GvfSpec::trace_decay);

  py::class_<HordeStepResult>(m, "HordeStepResult")
      .def_readonly("value", &HordeStepResult::value)
      .def_readonly("delta", &HordeStepResult::delta)
      .def_readonly("normalizer", &HordeStepResult::normalizer);

  py::class_<Horde>(m, "Horde")
      .def(py::init([](std::vector<GvfSpec> specs, std::shared_ptr<KanervaCoder> coder,
                       std::uint32_t channel_count, CumulantSource cumulant_source) {
             return Horde(std::move(specs), std::move(coder), channel_count, cumulant_source);
           }),
           py::arg("specs"), py::arg("coder"), py::arg("channel_count"),
           py::arg("cumulant_source"))
      .def_static("build",
                  [](std::uint32_t channel_count, const GvfSpec& tmpl,
                     std::shared_ptr<KanervaCoder> coder, CumulantSource cumulant_source,
                     const std::vector<double>& step_size_overrides) {
                    return Horde::build(channel_count, tmpl, std::move(coder), cumulant_source,
                                        step_size_overrides);
                  },
                  py::arg("channel_count"), py::arg("template"), py::arg("coder"),
                  py::arg("cumulant_source"),
                  py::arg("step_size_overrides") = std::vector<double>{})
      .def("step",
           [](Horde& horde, const std::vector<double>& frame_t,
              const std::vector<double>& frame_next, const std::vector<double>& raw_next,
              unsigned threads) {
             return horde.step(frame_t, frame_next, std::span<const double>(raw_next), threads);
           },
           py::arg("frame_t"), py::arg("frame_next"),
           py::arg("raw_next") = std::vector<double>{}, py::arg("threads") = 1)
      .def("step_features",
           [](Horde& horde, const FeatureVector& x_t, const FeatureVector& x_next,
              const std::vector<double>& cumulants, unsigned threads) {
             return horde.step_features(x_t, x_next, cumulants, threads);
           },
           py::arg("x_t"), py::arg("x_next"), py::arg("cumulants"), py::arg("threads") = 1)
      .def("cumulants_from",
           [](const Horde& horde, const std::vector<double>& frame_next) {
             return horde.cumulants_from(frame_next);
           },
           py::arg("frame_next"))
      .def("predictions", &Horde::predictions, py::arg("x"))
      .def("gvf_count", &Horde::gvf_count)
      .def("channel_count", &Horde::channel_count)
      .def("cumulant_source", &Horde::cumulant_source)
      .def("spec", &Horde::spec, py::arg("gvf"))
      .def("steps_taken", &Horde::steps_taken)
      .def("td", &Horde::td, py::arg("gvf"), py::return_value_policy::reference_internal)
      .def("tidbd", &Horde::tidbd, py::arg("gvf"), py::return_value_policy::reference_internal)
      .def("snapshot", &Horde::snapshot, py::arg("gvf"))
      .def("state_bytes", &Horde::state_bytes)
      .def("extra_state_bytes", &Horde::extra_state_bytes);

  // --- evaluation ---------------------------------------------------------------

  py::class_<ReturnSeries>(m, "ReturnSeries")
      .def_readonly("values", &ReturnSeries::values)
      .def_readonly("horizon_cut", &ReturnSeries::horizon_cut)
      .def("frame_count", &ReturnSeries::frame_count)
      .def("usable_steps", &ReturnSeries::usable_steps);

  py::class_<RmseSeries>(m, "RmseSeries")
      .def_readonly("value", &RmseSeries::value)
      .def_readonly("present", &RmseSeries::present)
      .def("accumulated", &RmseSeries::accumulated)
      .def("present_count", &RmseSeries::present_count);

  py::class_<PeriodStats>(m, "PeriodStats")
      .def_readonly("mean", &PeriodStats::mean)
      .def_readonly("samples", &PeriodStats::samples);

  py::class_<TimingReport>(m, "TimingReport")
      .def_readonly("encode_seconds_per_frame", &TimingReport::encode_seconds_per_frame)
      .def_readonly("update_seconds_per_step", &TimingReport::update_seconds_per_step)
      .def_readonly("steps", &TimingReport::steps)
      .def("seconds_per_step", &TimingReport::seconds_per_step);

  py::class_<TrialResult>(m, "TrialResult")
      .def_readonly("rmse", &TrialResult::rmse)
      .def_readonly("periods", &TrialResult::periods)
      .def_readonly("timing", &TrialResult::timing)
      .def_readonly("accumulated_rmse", &TrialResult::accumulated_rmse)
      .def_readonly("horde", &TrialResult::horde)
      .def_readonly("values", &TrialResult::values);

  m.def("return_horizon_cut", &return_horizon_cut, py::arg("discount"));
  m.def("compute_returns", &compute_returns, py::arg("cumulants"), py::arg("discount"));
  m.def("cumulant_series", &cumulant_series, py::arg("horde"), py::arg("frames"),
        py::arg("meta"));
  m.def("rmse_step",
        [](const std::vector<double>& returns, const std::vector<double>& values) {
          return rmse_step(returns, values);
        },
        py::arg("returns"), py::arg("values"));
  m.def("aggregate_periods", &aggregate_periods, py::arg("series"), py::arg("schedule"));
  m.def("encode_stream", &encode_stream, py::arg("coder"), py::arg("frames"), py::arg("meta"));
  m.def("run_trial",
        [](const Horde& horde, const std::vector<StreamFrame>& frames,
           const std::vector<ChannelMeta>& meta, const Schedule& schedule, unsigned threads) {
          TrialOptions options;
          options.threads = threads;
          return run_trial(horde, frames, meta, schedule, options);
        },
        py::arg("horde"), py::arg("frames"), py::arg("meta"), py::arg("schedule"),
        py::arg("threads") = 1);

  // --- sweeps ---------------------------------------------------------------------

  py::class_<SweepPlan>(m, "SweepPlan")
      .def(py::init<>())
      .def_readwrite("method", &SweepPlan::method)
      .def_readwrite("prototype_grid", &SweepPlan::prototype_grid)
      .def_readwrite("ratio_grid", &SweepPlan::ratio_grid)
      .def_readwrite("step_multiplier_grid", &SweepPlan::step_multiplier_grid)
      .def_readwrite("theta_grid", &SweepPlan::theta_grid)
      .def_readwrite("seeds", &SweepPlan::seeds)
      .def_readwrite("discount", &SweepPlan::discount)
      .def_readwrite("trace_decay", &SweepPlan::trace_decay)
      .def_readwrite("decay_time", &SweepPlan::decay_time)
      .def_readwrite("xi_consistent_form", &SweepPlan::xi_consistent_form)
      .def_readwrite("cumulant_source", &SweepPlan::cumulant_source)
      .def("validate", &SweepPlan::validate);

  py::class_<SweepCell>(m, "SweepCell")
      .def_readonly("prototypes", &SweepCell::prototypes)
      .def_readonly("ratio", &SweepCell::ratio)
      .def_readonly("multiplier", &SweepCell::multiplier)
      .def_readonly("theta", &SweepCell::theta)
      .def("alpha0", &SweepCell::alpha0, py::arg("n_times_eta"));

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("method", &SweepRow::method)
      .def_readonly("prototypes", &SweepRow::prototypes)
      .def_readonly("ratio", &SweepRow::ratio)
      .def_readonly("alpha0", &SweepRow::alpha0)
      .def_readonly("theta", &SweepRow::theta)
      .def_readonly("seed", &SweepRow::seed)
      .def_readonly("diverged", &SweepRow::diverged)
      .def_readonly("accumulated_rmse", &SweepRow::accumulated_rmse)
      .def_readonly("period_means", &SweepRow::period_means);

  py::class_<SensitivityCurve>(m, "SensitivityCurve")
      .def_readonly("method", &SensitivityCurve::method)
      .def_readonly("theta", &SensitivityCurve::theta)
      .def_readonly("prototypes", &SensitivityCurve::prototypes)
      .def_readonly("ratio", &SensitivityCurve::ratio)
      .def_readonly("alpha0", &SensitivityCurve::alpha0)
      .def_readonly("accumulated_rmse", &SensitivityCurve::accumulated_rmse)
      .def_readonly("spread", &SensitivityCurve::spread);

  m.def("enumerate_cells", &enumerate_cells, py::arg("plan"));
  m.def("sweep_row_key", &sweep_row_key, py::arg("row"));
  m.def("run_sweep",
        [](const SweepPlan& plan, const SynthProfile& profile, const std::string& results_path,
           bool resume, unsigned threads) {
          SweepOptions options;
          options.results_path = results_path;
          options.resume = resume;
          options.threads = threads;
          return run_sweep(plan, profile, options);
        },
        py::arg("plan"), py::arg("profile"), py::arg("results_path") = std::string(),
        py::arg("resume") = true, py::arg("threads") = 1);
  m.def("load_sweep_csv", &load_sweep_csv, py::arg("path"));
  m.def("table_plan_td", &table_plan_td);
  m.def("table_plan_tidbd", &table_plan_tidbd);
  m.def("sensitivity_theta_grid", &sensitivity_theta_grid);
  m.def("table_step_multipliers", &table_step_multipliers);
  m.def("stepsize_sensitivity", &stepsize_sensitivity, py::arg("rows"));
}
