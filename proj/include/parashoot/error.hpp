#pragma once

#include <stdexcept>
#include <string>

namespace parashoot {

// Machine-readable failure categories. The CLI maps these onto its error
// JSON and exit codes, so the set is part of the tool's public contract.
enum class errc {
    singularity,             // evaluation point too close to a centre
    domain,                  // input outside an operation's domain
    invalid_partition,       // empty or improper centre partition
    inadmissible_class,      // parity class with all bits equal
    endpoint_mismatch,       // |q-| != |q+| or coincident endpoints
    point_on_path,           // winding query point on the polyline
    ill_conditioned,         // winding rounding residual too large
    class_change,            // minimizer could not preserve the parity class
    max_iterations,          // minimizer iteration budget exhausted
    barrier_saturated,       // minimizer converged with active collision barrier
    no_routing,              // seed construction exhausted all routings
    degenerate_path,         // constant path where a nonconstant one is required
    energy_residual,         // rescaled trajectory violates the zero-energy budget
    close_encounter,         // alpha > 1 trajectory entered the switch region
    step_underflow,          // integrator step size collapsed
    wrong_alpha,             // Levi-Civita machinery invoked with alpha != 1
    overlap_region,          // two regularization regions overlap
    tail_too_short,          // trajectory tail insufficient for a fit
    insufficient_span,       // fit window below one decade
    insufficient_data,       // fewer radii than a fit requires
    window_too_short,        // collapse probe window not covered
    non_converged,           // continuation deviations not decreasing
    config,                  // bad run configuration
    io,                      // file system failure
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::singularity: return "singularity";
        case errc::domain: return "domain";
        case errc::invalid_partition: return "invalid-partition";
        case errc::inadmissible_class: return "inadmissible-class";
        case errc::endpoint_mismatch: return "endpoint-mismatch";
        case errc::point_on_path: return "point-on-path";
        case errc::ill_conditioned: return "ill-conditioned";
        case errc::class_change: return "class-change-unrecoverable";
        case errc::max_iterations: return "max-iterations";
        case errc::barrier_saturated: return "collision-barrier-saturated";
        case errc::no_routing: return "no-routing-found";
        case errc::degenerate_path: return "degenerate-path";
        case errc::energy_residual: return "energy-residual-too-large";
        case errc::close_encounter: return "close-encounter";
        case errc::step_underflow: return "step-underflow";
        case errc::wrong_alpha: return "wrong-alpha";
        case errc::overlap_region: return "overlapping-regularization-regions";
        case errc::tail_too_short: return "tail-too-short";
        case errc::insufficient_span: return "insufficient-span";
        case errc::insufficient_data: return "insufficient-data";
        case errc::window_too_short: return "window-too-short";
        case errc::non_converged: return "non-converged";
        case errc::config: return "config";
        case errc::io: return "io";
    }
    return "unknown";
}

class solver_error : public std::runtime_error {
  public:
    solver_error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }
    const char* code_name() const { return errc_name(code_); }

  private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
    throw solver_error(code, what);
}

}  // namespace parashoot
