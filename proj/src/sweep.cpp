#include <charconv>

#include "memclust/evaluation.hpp"

namespace memclust {

SweepAxis parse_sweep_axis(std::string_view name) {
    if (name == "d_m" || name == "dm") return SweepAxis::d_m;
    if (name == "k") return SweepAxis::k;
    if (name == "encoder-variant" || name == "encoder") return SweepAxis::encoder_variant;
    throw Error(errc::invalid_argument, "unknown sweep axis '" + std::string(name) + "'");
}

std::string_view to_string(SweepAxis axis) noexcept {
    switch (axis) {
        case SweepAxis::d_m: return "d_m";
        case SweepAxis::k: return "k";
        case SweepAxis::encoder_variant: return "encoder-variant";
    }
    return "unknown";
}

namespace {

std::size_t parse_positive(const std::string& value) {
    std::size_t out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || out == 0) {
        throw Error(errc::invalid_argument, "'" + value + "' is not a positive integer");
    }
    return out;
}

}  // namespace

ExperimentSetup apply_sweep_value(const ExperimentSetup& base, SweepAxis axis, const std::string& value) {
    ExperimentSetup setup = base;
    switch (axis) {
        case SweepAxis::d_m: {
            const auto d_m = parse_positive(value);
            for (auto& s : setup.strategies) s.d_m = d_m;
            setup.encoder.d_m = d_m;
            break;
        }
        case SweepAxis::k: {
            const auto k = parse_positive(value);
            for (auto& s : setup.strategies) {
                if (s.variant == Strategy::clustering) s.k = k;
            }
            break;
        }
        case SweepAxis::encoder_variant: {
            if (value == "reference" || value.rfind("reference:", 0) == 0) {
                setup.encoder.kind = EncoderKind::reference;
                setup.encoder.bridge_endpoint.reset();
                setup.encoder.model_name.reset();
                if (value.size() > 10) setup.encoder.d_e = parse_positive(value.substr(10));
            } else {
                setup.encoder.kind = EncoderKind::bridge;
                setup.encoder.bridge_endpoint = value;
                setup.encoder.model_name.reset();
                if (setup.generator.kind == GeneratorKind::bridge) setup.generator.bridge_endpoint = value;
            }
            break;
        }
    }
    return setup;
}

SweepResult sweep(std::span<const Example> dataset, const ExperimentSetup& base, SweepAxis axis,
                  const std::vector<std::string>& values) {
    if (values.empty()) throw Error(errc::invalid_argument, "sweep needs at least one value");
    SweepResult result;
    result.axis = axis;
    for (const auto& v : values) {
        SweepPoint point;
        point.value = v;
        try {
            point.report = run_experiment(dataset, apply_sweep_value(base, axis, v));
        } catch (const Error& e) {
            point.error = e.what();
        }
        result.points.push_back(std::move(point));
    }
    return result;
}

}  // namespace memclust
