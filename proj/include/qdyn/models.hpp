// models.hpp — shipped example families with known closed forms, used by
// tests, acceptance runs, and the CLI.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdyn/gkls.hpp"
#include "qdyn/series.hpp"

namespace qdyn {

struct ModelDescriptor {
    std::string name;
    Regime regime = Regime::semigroup;
    std::map<std::string, double> parameters;
    std::function<JumpModel(const TimeGrid&)> build;
    std::optional<GKLSSpec> gkls; // set for generator-driven models
};

// E(rho) = Tr(rho) I / d; CPTP and idempotent.
SuperOp depolarizing_channel(int dim);

// Qubit, H = 0, single channel (gamma, sigma_minus).
ModelDescriptor model_amplitude_damping(double gamma);
ModelDescriptor model_amplitude_damping(std::function<double(double)> gamma);

struct Waiting {
    enum class Kind { exponential, gamma2 };
    Kind kind = Kind::exponential;
    double kappa = 1.0;
};

// Jump model with free evolution q(t) id, survival q of the waiting-time
// density f (exponential: kappa e^{-kappa t}; gamma2: kappa^2 t e^{-kappa t}),
// and the renewal-consistent jump kernel w (w * q = f) paired with the
// matching trace part, so K = Phi - Z annihilates traces. With
// `rate` given, kappa varies along the grid (gamma2 only) and the free
// survival is integrated per column from its equivalent local ODE.
ModelDescriptor model_semi_markov(const Waiting& waiting, const SuperOp& channel,
                                  std::optional<std::function<double(double)>> rate = {});

// Qubit, H = (omega/2) sigma_z, single channel (gamma(t), sigma_z);
// coherence evolves as e^{-i omega t - 2 int gamma}.
ModelDescriptor model_dephasing_inhom(std::function<double(double)> gamma, double omega);

// Name-keyed registry for the CLI.
std::vector<std::string> model_names();
ModelDescriptor make_model(const std::string& name,
                           const std::map<std::string, double>& params);

} // namespace qdyn
