/** @file solvers.cpp

    @brief Load programs, Newton and descent equilibrium solves, modal
    analysis and the continuation driver.
*/
#include "shellmodal/solvers.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace shellmodal {

std::string to_string(LoadKind k) {
    switch (k) {
    case LoadKind::None: return "none";
    case LoadKind::AreaStretch: return "area-stretch";
    case LoadKind::Uniaxial: return "uniaxial";
    case LoadKind::AxialStrain: return "axial-strain";
    case LoadKind::Adhesion: return "adhesion";
    }
    return "unknown";
}

void LoadProgram::validate() const {
    if (kind == LoadKind::None) return;
    if (steps < 1) throw InvalidArgument("solvers", "load program needs at least one step");
    if (!std::isfinite(start) || !std::isfinite(end) || start == end) {
        throw InvalidArgument("solvers", "load program needs finite, distinct start and end values");
    }
    if (!(min_step_fraction > 0.0 && min_step_fraction <= 1.0)) {
        throw InvalidArgument("solvers", "min_step_fraction must lie in (0, 1]");
    }
    if (jump_limit < 0.0) throw InvalidArgument("solvers", "jump limit must be non-negative");
    const double lo = std::min(start, end), hi = std::max(start, end);
    switch (kind) {
    case LoadKind::AreaStretch:
    case LoadKind::Uniaxial:
        if (!(lo > 0.0)) throw InvalidArgument("solvers", "stretches must be positive");
        break;
    case LoadKind::AxialStrain:
        if (!(lo > -1.0)) throw InvalidArgument("solvers", "axial strain must exceed -1");
        break;
    case LoadKind::Adhesion: {
        if (!(lo >= 0.0)) throw InvalidArgument("solvers", "adhesion energy must be non-negative");
        AdhesionParams a = adhesion;
        a.Gamma = hi;
        a.validate();
        break;
    }
    case LoadKind::None: break;
    }
}

std::vector<double> LoadProgram::schedule() const {
    if (kind == LoadKind::None) return {start};
    std::vector<double> p(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) p[static_cast<std::size_t>(k)] = start + (end - start) * k / steps;
    p.back() = end;
    return p;
}

LoadedModel::LoadedModel(const ShellModel& model, const LoadProgram& program)
    : model_(model), program_(program), map_(model) {
    program_.validate();
    const bool flat = model.shape != Shape::Tube;
    if ((program.kind == LoadKind::AreaStretch || program.kind == LoadKind::Uniaxial) && !flat) {
        throw InvalidArgument("solvers", "in-plane stretch programs need a flat sheet");
    }
    if (program.kind == LoadKind::AxialStrain && flat) {
        throw InvalidArgument("solvers", "axial strain programs need a nanotube");
    }
    if (program.kind == LoadKind::Uniaxial) {
        const Vec3 a = model.lattice.armchair;
        const double c = std::cos(program.direction_angle), s = std::sin(program.direction_angle);
        dir_ = (c * a + s * Vec3::UnitZ().cross(a)).normalized();
        perp_ = Vec3::UnitZ().cross(dir_);
    }
}

VecX LoadedModel::homogeneous(double p) const {
    VecX u = VecX::Zero(model_.num_dofs());
    if (program_.kind == LoadKind::None || program_.kind == LoadKind::Adhesion) return u;
    double l1 = 1.0, l2 = 1.0;
    if (program_.kind == LoadKind::AreaStretch) {
        l1 = l2 = std::sqrt(p);
    } else if (program_.kind == LoadKind::Uniaxial) {
        l1 = p;
        l2 = uniaxial_lateral_stretch(p, program_.direction_angle, model_.material);
    }
    for (int i = 0; i < model_.num_nodes(); ++i) {
        const Vec3 d = model_.nodes[static_cast<std::size_t>(i)] - model_.center;
        Vec3 du;
        if (program_.kind == LoadKind::AxialStrain) {
            du = p * d.dot(model_.axis) * model_.axis;
        } else {
            du = (l1 - 1.0) * d.dot(dir_) * dir_ + (l2 - 1.0) * d.dot(perp_) * perp_;
        }
        u.segment<3>(3 * i) = du;
    }
    return u;
}

void LoadedModel::impose(double p, VecX& u) const {
    const VecX h = homogeneous(p);
    for (int i = 0; i < model_.num_dofs(); ++i) {
        if (map_.full_to_free[static_cast<std::size_t>(i)] < 0) u[i] = h[i];
    }
}

AdhesionParams LoadedModel::adhesion(double p) const {
    AdhesionParams a = program_.adhesion;
    if (program_.kind == LoadKind::Adhesion) {
        a.Gamma = p;
    } else {
        a.Gamma = 0.0;
    }
    return a;
}

double LoadedModel::energy(const VecX& u, double p) const {
    return strain_energy_total(model_, u) + penalty_energy(model_, u) + adhesion_energy(model_, u, adhesion(p));
}

void LoadedModel::gradient(const VecX& u, double p, VecX& g, SpMat* K) const {
    g = VecX::Zero(model_.num_dofs());
    if (K != nullptr) {
        if (K->nonZeros() == 0) {
            *K = make_pattern(model_);
        } else {
            for (int k = 0; k < K->outerSize(); ++k) {
                for (SpMat::InnerIterator it(*K, k); it; ++it) it.valueRef() = 0.0;
            }
        }
    }
    assemble_internal(model_, u, g, K);
    assemble_penalties(model_, u, g, K);
    const AdhesionParams a = adhesion(p);
    if (a.Gamma != 0.0) contact_force_and_stiffness(model_, u, a, g, K);
}

namespace {

double max_nodal(const VecX& d) {
    double m = 0.0;
    for (Eigen::Index i = 0; i + 2 < d.size(); i += 3) m = std::max(m, d.segment<3>(i).norm());
    return m;
}

bool positive_definite(const Eigen::SimplicialLDLT<SpMat>& ldlt) {
    if (ldlt.info() != Eigen::Success) return false;
    const VecX& d = ldlt.vectorD();
    return d.allFinite() && d.minCoeff() > 1e-14 * d.cwiseAbs().maxCoeff();
}

} // namespace

NewtonResult newton_solve(const LoadedModel& system, double p, const VecX& guess, const NewtonOptions& opt) {
    const DofMap& map = system.dofs();
    NewtonResult res;
    res.u = guess;
    system.impose(p, res.u);
    VecX g;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    double tol = 0.0, previous = std::numeric_limits<double>::infinity();
    int slow = 0;
    for (int it = 0; it <= opt.max_iterations; ++it) {
        try {
            system.gradient(res.u, p, g, &res.K);
        } catch (const ShellError& e) {
            throw ConvergenceError("solvers", std::string("Newton state rejected: ") + e.what());
        }
        const VecX r = map.restrict_vector(g);
        const double rn = r.norm();
        if (!std::isfinite(rn)) throw ConvergenceError("solvers", "non-finite residual");
        if (it == 0) {
            res.initial_residual = rn;
            tol = std::max(opt.relative_tolerance * rn, opt.absolute_tolerance);
        }
        res.iterations = it;
        res.residual = rn;
        if (rn <= tol) return res;
        // Round-off floor: accept a stalled residual that is negligible in absolute terms.
        slow = rn > 0.5 * previous ? slow + 1 : 0;
        if (slow >= 2 && rn <= 1e-7 * std::max(res.initial_residual, 1.0)) return res;
        if (rn > 1e8 * std::max(res.initial_residual, 1.0)) throw ConvergenceError("solvers", "Newton diverged");
        if (it == opt.max_iterations) break;
        previous = rn;

        const SpMat Kr = map.restrict_matrix(res.K);
        ldlt.compute(Kr);
        if (ldlt.info() != Eigen::Success) throw ConvergenceError("solvers", "singular tangent");
        VecX d = -ldlt.solve(r);
        if (!d.allFinite()) throw ConvergenceError("solvers", "singular tangent");
        VecX full = VecX::Zero(res.u.size());
        map.scatter(d, full);
        const double step = max_nodal(full);
        if (opt.max_increment > 0.0 && step > opt.max_increment) full *= opt.max_increment / step;
        res.u += full;
    }
    throw ConvergenceError("solvers", "Newton did not converge in " + std::to_string(opt.max_iterations) +
                                          " iterations (residual " + std::to_string(res.residual) + ")");
}

NewtonResult descent_solve(const LoadedModel& system, double p, const VecX& guess, const NewtonOptions& opt) {
    const DofMap& map = system.dofs();
    const SpMat Mr = map.restrict_matrix(assemble_mass(system.model()));
    NewtonResult res;
    res.fallback = true;
    res.u = guess;
    system.impose(p, res.u);
    auto safe_energy = [&](const VecX& u) {
        try {
            return system.energy(u, p);
        } catch (const ShellError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    double E = safe_energy(res.u);
    if (!std::isfinite(E)) throw ConvergenceError("solvers", "descent start state is inadmissible");
    VecX g;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    double tol = 0.0, mu = 0.0, mu_scale = 0.0, best = 0.0;
    int stalled = 0;
    for (int it = 0; it <= opt.fallback_iterations; ++it) {
        system.gradient(res.u, p, g, &res.K);
        const VecX r = map.restrict_vector(g);
        const double rn = r.norm();
        if (it == 0) {
            res.initial_residual = rn;
            tol = std::max(opt.relative_tolerance * rn, opt.absolute_tolerance);
        }
        res.iterations = it;
        res.residual = rn;
        if (rn <= tol) {
            return res;
        }
        // Round-off floor: no progress over many iterations at a tiny residual.
        if (it == 0 || rn < 0.5 * best) {
            best = rn;
            stalled = 0;
        } else if (++stalled >= 20 && rn <= 1e-7 * std::max(res.initial_residual, 1.0)) {
            return res;
        }
        const SpMat Kr = map.restrict_matrix(res.K);
        if (mu_scale == 0.0) mu_scale = norm1(Kr) / std::max(norm1(Mr), 1e-300);
        // Smallest tried shift that makes the damped tangent positive definite.
        for (int tries = 0;; ++tries) {
            const SpMat A = mu > 0.0 ? SpMat(Kr + mu * Mr) : Kr;
            ldlt.compute(A);
            if (positive_definite(ldlt)) break;
            mu = mu > 0.0 ? 4.0 * mu : 1e-8 * mu_scale;
            if (tries > 60) throw ConvergenceError("solvers", "descent could not regularize the tangent");
        }
        VecX d = -ldlt.solve(r);
        VecX full = VecX::Zero(res.u.size());
        map.scatter(d, full);
        const double step = max_nodal(full);
        if (opt.max_increment > 0.0 && step > opt.max_increment) full *= opt.max_increment / step;
        const double slope = g.dot(full);
        double t = 1.0, E_new = E;
        bool accepted = false;
        VecX g_t;
        for (int ls = 0; ls < 40; ++ls) {
            E_new = safe_energy(res.u + t * full);
            if (!std::isfinite(E_new)) {
                t *= 0.5;
                continue;
            }
            if (std::abs(t * slope) > 1e-11 * std::abs(E)) {
                accepted = E_new <= E + 1e-4 * t * slope;
            } else {
                // Energy change below round-off: judge by the directional
                // derivative at the trial point instead.
                system.gradient(res.u + t * full, p, g_t, nullptr);
                accepted = g_t.dot(full) <= 0.5 * std::abs(slope);
            }
            if (accepted) break;
            t *= 0.5;
        }
        if (!accepted) {
            // Near a minimum the energy differences sink below round-off.
            if (rn <= 1e-6 * res.initial_residual && mu == 0.0) return res;
            mu = mu > 0.0 ? 10.0 * mu : 1e-6 * mu_scale;
            continue;
        }
        res.u += t * full;
        E = E_new;
        mu = t == 1.0 ? (mu > 1e-12 * mu_scale ? mu / 4.0 : 0.0) : mu;
    }
    throw ConvergenceError("solvers", "energy descent did not converge");
}

double ModalStep::frequency(int i) const {
    const double w2 = omega2[i];
    return std::copysign(std::sqrt(std::abs(w2)), w2) / (2.0 * pi);
}

ModalStep modal_analysis(const SpMat& K, const SpMat& M, int k, double shift, bool free_model,
                         const EigenOptions& base) {
    if (k < 1) throw InvalidArgument("solvers", "at least one mode must be requested");
    EigenOptions opt = base;
    const int wanted = free_model && shift == 0.0 ? k + 6 : k;
    opt.num_modes = wanted;
    opt.shift = shift;
    EigenResult er = solve_generalized(K, M, opt);
    // Unstable directions must never drop out: count negative eigenvalues by
    // Sylvester inertia and widen the request until all of them are present.
    // Free models shift K by a small multiple of M first so that the rigid
    // null space does not produce spurious negative pivots.
    int negative = 0;
    {
        SpMat A = K;
        if (free_model) {
            const double k_max = K.diagonal().cwiseAbs().maxCoeff();
            const double m_max = std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
            A = K + (1e-10 * k_max / m_max) * M;
        }
        const Eigen::SimplicialLDLT<SpMat> ldlt(A);
        if (ldlt.info() == Eigen::Success) {
            const VecX& d = ldlt.vectorD();
            const double floor = 1e-10 * d.cwiseAbs().maxCoeff();
            for (Eigen::Index i = 0; i < d.size(); ++i) negative += d[i] < -floor ? 1 : 0;
        }
    }
    auto found = [&] {
        const double floor = 1e-10 * std::max(er.values.cwiseAbs().maxCoeff(), 1e-300);
        return static_cast<int>((er.values.array() < -floor).count());
    };
    const Eigen::Index cap = std::min<Eigen::Index>(K.rows(), std::max(4 * wanted, wanted + 64) + negative);
    while (found() < negative && opt.num_modes < cap) {
        opt.num_modes = static_cast<int>(std::min<Eigen::Index>(2 * opt.num_modes + negative, cap));
        er = solve_generalized(K, M, opt);
    }
    if (er.values.size() > wanted) {
        // Keep every negative value, then the values nearest the shift.
        const double floor = 1e-10 * er.values.cwiseAbs().maxCoeff();
        std::vector<int> idx(static_cast<std::size_t>(er.values.size()));
        std::iota(idx.begin(), idx.end(), 0);
        auto key = [&](int i) { return er.values[i] < -floor ? -1.0 : std::abs(er.values[i] - shift); };
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return key(a) < key(b); });
        idx.resize(static_cast<std::size_t>(std::max<Eigen::Index>(wanted, found())));
        std::sort(idx.begin(), idx.end());
        VecX values(static_cast<Eigen::Index>(idx.size()));
        MatX vectors(er.vectors.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            values[static_cast<Eigen::Index>(j)] = er.values[idx[j]];
            vectors.col(static_cast<Eigen::Index>(j)) = er.vectors.col(idx[j]);
        }
        er.values = values;
        er.vectors = vectors;
    }
    if (er.max_residual > 1e-8 || er.max_orthogonality > 1e-8) {
        throw ConvergenceError("solvers", "eigenpairs fail the residual/orthogonality bounds (" +
                                              std::to_string(er.max_residual) + ", " +
                                              std::to_string(er.max_orthogonality) + ")");
    }
    ModalStep s;
    s.omega2 = er.values;
    s.vectors = er.vectors;
    s.max_residual = er.max_residual;
    s.max_orthogonality = er.max_orthogonality;
    s.rigid.assign(static_cast<std::size_t>(s.size()), false);
    if (free_model && shift == 0.0 && s.size() >= 7) {
        std::vector<double> mags(static_cast<std::size_t>(s.size()));
        for (int i = 0; i < s.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(s.omega2[i]);
        std::sort(mags.begin(), mags.end());
        const double cutoff = 1e-6 * mags[6];
        for (int i = 0; i < s.size(); ++i) s.rigid[static_cast<std::size_t>(i)] = std::abs(s.omega2[i]) < cutoff;
    }
    return s;
}

namespace {

void assign_labels(const ShellModel& model, const DofMap& map, const SpMat& M, ModalResult& result, ModalStep& cur,
                   double threshold) {
    const bool first = result.steps.empty();
    if (!first) align_degenerate(result.steps.back().vectors, cur.omega2, cur.vectors, M);
    const std::vector<std::string> fresh = classify_modes(model, map, cur, first);
    cur.labels.assign(static_cast<std::size_t>(cur.size()), "");
    std::vector<std::string> taken;
    // Taken names: numbered families (IP3, mode2) move to the next free
    // number, index labels such as (1,2) get a #k suffix.
    auto unique = [&](const std::string& name) {
        auto is_taken = [&](const std::string& n) { return std::find(taken.begin(), taken.end(), n) != taken.end(); };
        std::string out = name;
        const std::size_t digits = name.find_last_not_of("0123456789") + 1;
        if (digits < name.size() && digits > 0) {
            const std::string family = name.substr(0, digits);
            for (int k = std::stoi(name.substr(digits)); is_taken(out); ++k) out = family + std::to_string(k);
        } else {
            for (int k = 2; is_taken(out); ++k) out = name + "#" + std::to_string(k);
        }
        taken.push_back(out);
        return out;
    };
    if (first) {
        for (int i = 0; i < cur.size(); ++i) {
            const std::string& f = fresh[static_cast<std::size_t>(i)];
            cur.labels[static_cast<std::size_t>(i)] = f == "rigid" ? f : unique(f);
        }
        return;
    }
    const ModalStep& prev = result.steps.back();
    const TrackingResult tr = track_modes(prev.vectors, cur.vectors, M, threshold, prev.rigid, cur.rigid);
    for (int i = 0; i < cur.size(); ++i) {
        const int j = tr.match[static_cast<std::size_t>(i)];
        if (j >= 0) {
            cur.labels[static_cast<std::size_t>(i)] = prev.labels[static_cast<std::size_t>(j)];
            taken.push_back(cur.labels[static_cast<std::size_t>(i)]);
        }
    }
    // Earlier steps' labels stay reserved so a reappearing shape gets a new name.
    for (const ModalStep& s : result.steps) {
        for (const std::string& l : s.labels) {
            if (l != "rigid" && std::find(taken.begin(), taken.end(), l) == taken.end()) taken.push_back(l);
        }
    }
    for (int i = 0; i < cur.size(); ++i) {
        if (cur.labels[static_cast<std::size_t>(i)].empty()) {
            const std::string& f = fresh[static_cast<std::size_t>(i)];
            cur.labels[static_cast<std::size_t>(i)] = f == "rigid" ? f : unique(f);
        }
    }
}

} // namespace

namespace {

/// d(restricted residual)/dp by central differences; the fixed dofs follow
/// the boundary motion while the free dofs are held.
VecX residual_parameter_derivative(const LoadedModel& system, const VecX& u, double p, double h) {
    VecX a = u, b = u, g;
    system.impose(p + h, a);
    system.gradient(a, p + h, g, nullptr);
    const VecX ra = system.dofs().restrict_vector(g);
    system.impose(p - h, b);
    system.gradient(b, p - h, g, nullptr);
    return (ra - system.dofs().restrict_vector(g)) / (2.0 * h);
}

/// Unit tangent (or secant) in the scaled space x = (u_free, psi p).
struct PathDirection {
    VecX u;
    double q = 0.0;
};

/// Newton corrector on the residual plus the hyperplane through the
/// predictor orthogonal to `t`. `u` and `p` hold the predictor on entry and
/// the converged point on exit. Throws ConvergenceError.
NewtonResult arclength_correct(const LoadedModel& system, VecX& u, double& p, const PathDirection& t, double psi,
                               double h, const NewtonOptions& opt) {
    const DofMap& map = system.dofs();
    NewtonResult res;
    VecX g;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    double tol = 0.0, previous = std::numeric_limits<double>::infinity();
    int slow = 0;
    system.impose(p, u);
    for (int it = 0; it <= opt.max_iterations; ++it) {
        try {
            system.gradient(u, p, g, &res.K);
        } catch (const ShellError& e) {
            throw ConvergenceError("solvers", std::string("arclength state rejected: ") + e.what());
        }
        const VecX r = map.restrict_vector(g);
        const double rn = r.norm();
        if (!std::isfinite(rn)) throw ConvergenceError("solvers", "non-finite residual");
        if (it == 0) {
            res.initial_residual = rn;
            tol = std::max(opt.relative_tolerance * rn, opt.absolute_tolerance);
        }
        res.iterations = it;
        res.residual = rn;
        if (rn <= tol) break;
        slow = rn > 0.5 * previous ? slow + 1 : 0;
        if (slow >= 2 && rn <= 1e-7 * std::max(res.initial_residual, 1.0)) break;
        if (rn > 1e8 * std::max(res.initial_residual, 1.0)) throw ConvergenceError("solvers", "arclength corrector diverged");
        if (it == opt.max_iterations) {
            throw ConvergenceError("solvers", "arclength corrector did not converge");
        }
        previous = rn;

        ldlt.compute(map.restrict_matrix(res.K));
        if (ldlt.info() != Eigen::Success) throw ConvergenceError("solvers", "singular tangent");
        const VecX a = ldlt.solve(r);
        const VecX b = ldlt.solve(residual_parameter_derivative(system, u, p, h) / psi);
        const double denom = t.q - t.u.dot(b);
        if (!a.allFinite() || !b.allFinite() || std::abs(denom) < 1e-300) {
            throw ConvergenceError("solvers", "singular bordered system");
        }
        const double dq = t.u.dot(a) / denom;
        VecX full = VecX::Zero(u.size());
        map.scatter(-a - b * dq, full);
        double scale = 1.0;
        const double step = max_nodal(full);
        if (opt.max_increment > 0.0 && step > opt.max_increment) scale = opt.max_increment / step;
        u += scale * full;
        p += scale * dq / psi;
        system.impose(p, u);
    }
    res.u = u;
    return res;
}

} // namespace

ModalResult run_continuation(const ShellModel& model, const LoadProgram& program, const ContinuationOptions& opt) {
    const LoadedModel system(model, program);
    const DofMap& map = system.dofs();
    const SpMat Mr = map.restrict_matrix(assemble_mass(model));
    const bool free_model = map.num_free() == model.num_dofs();
    const std::vector<double> targets = program.schedule();
    const double min_step = program.min_step_fraction * std::abs(program.end - program.start);

    ModalResult result;
    auto record = [&](const NewtonResult& nr, double p, bool substep, bool snap) {
        ModalStep s = modal_analysis(map.restrict_matrix(nr.K), Mr, opt.num_modes, opt.shift, free_model, opt.eigen);
        s.parameter = p;
        s.u = nr.u;
        s.newton_iterations = nr.iterations;
        s.newton_residual = nr.residual;
        s.substep = substep;
        s.snap = snap;
        assign_labels(model, map, Mr, result, s, opt.mac_threshold);
        if (result.steps.empty()) {
            for (int i = 0; i < s.size(); ++i) {
                if (!s.rigid[static_cast<std::size_t>(i)]) {
                    result.reference_frequency = s.frequency(i);
                    break;
                }
            }
        }
        result.steps.push_back(std::move(s));
        if (opt.on_step) opt.on_step(result, static_cast<int>(result.steps.size()) - 1);
    };
    auto solve = [&](double p, const VecX& guess) {
        try {
            return newton_solve(system, p, guess, opt.newton);
        } catch (const ConvergenceError&) {
            return descent_solve(system, p, guess, opt.newton);
        }
    };

    NewtonResult state = solve(targets[0], system.homogeneous(targets[0]));
    record(state, targets[0], false, state.fallback);

    auto stop_if_unstable = [&](double p) {
        if (!program.stop_on_instability) return false;
        const ModalStep& s = result.steps.back();
        bool unstable = false;
        for (int i = 0; i < s.size(); ++i) unstable = unstable || (!s.rigid[static_cast<std::size_t>(i)] && s.unstable(i));
        if (unstable) {
            result.terminated = true;
            result.termination = "instability at parameter " + std::to_string(p);
        }
        return unstable;
    };

    if (program.arclength && program.kind != LoadKind::None) {
        const double span = program.end - program.start;
        const double dir = span > 0.0 ? 1.0 : -1.0;
        const double h = 1e-6 * std::abs(span);
        // First tangent from K du/dp = -dr/dp; psi weighs the parameter like the response.
        Eigen::SimplicialLDLT<SpMat> ldlt(map.restrict_matrix(state.K));
        VecX z = ldlt.info() == Eigen::Success
                     ? VecX(-ldlt.solve(residual_parameter_derivative(system, state.u, targets[0], h)))
                     : VecX::Zero(map.num_free());
        if (!z.allFinite()) z.setZero();
        const double psi = z.norm() > 0.0 ? z.norm() : 1.0;
        PathDirection t{dir * z / psi, dir};
        {
            const double n = std::sqrt(t.u.squaredNorm() + t.q * t.q);
            t.u /= n;
            t.q /= n;
        }
        const double ds_nominal = std::abs(span) / program.steps * psi * std::sqrt(2.0);
        const double ds_min = program.min_step_fraction * ds_nominal;
        double ds = ds_nominal, p_cur = targets[0];
        int successes = 0;
        for (int budget = 50 * program.steps + 100;; --budget) {
            if (budget <= 0) {
                result.terminated = true;
                result.solver_failure = true;
                result.termination = "arclength step budget exhausted at parameter " + std::to_string(p_cur);
                break;
            }
            VecX u_new = state.u;
            {
                VecX du = VecX::Zero(u_new.size());
                map.scatter(ds * t.u, du);
                u_new += du;
            }
            double p_new = p_cur + ds * t.q / psi;
            NewtonResult next;
            try {
                next = arclength_correct(system, u_new, p_new, t, psi, h, opt.newton);
            } catch (const ConvergenceError& e) {
                successes = 0;
                ds *= 0.5;
                if (ds < ds_min) {
                    result.terminated = true;
                    result.solver_failure = true;
                    result.termination = std::string("arclength failure at parameter ") + std::to_string(p_cur) +
                                         ": " + e.what();
                    break;
                }
                continue;
            }
            PathDirection secant{map.restrict_vector(next.u - state.u), psi * (p_new - p_cur)};
            const double n = std::sqrt(secant.u.squaredNorm() + secant.q * secant.q);
            if (n > 0.0) {
                secant.u /= n;
                secant.q /= n;
            }
            // Sharp turns or large nodal moves signal a jump to another branch: retry shorter.
            const bool too_far = program.jump_limit > 0.0 && max_nodal(next.u - state.u) > program.jump_limit;
            if (n > 0.0 && (too_far || secant.u.dot(t.u) + secant.q * t.q < std::cos(pi / 9)) && ds > ds_min) {
                successes = 0;
                ds = std::max(0.5 * ds, ds_min);
                continue;
            }
            if (dir * (p_new - program.start) < 0.0) {
                result.terminated = true;
                result.solver_failure = true;
                result.termination = "arclength path returned past the start value at parameter " + std::to_string(p_cur);
                break;
            }
            if (dir * (p_new - program.end) >= 0.0) {
                // Passed the end value: finish with a parameter-controlled solve there.
                const double alpha = (program.end - p_cur) / (p_new - p_cur);
                try {
                    state = solve(program.end, state.u + alpha * (next.u - state.u));
                } catch (const ConvergenceError& e) {
                    result.terminated = true;
                    result.solver_failure = true;
                    result.termination = std::string("solver failure at parameter ") + std::to_string(program.end) +
                                         ": " + e.what();
                    break;
                }
                record(state, program.end, false, state.fallback);
                stop_if_unstable(program.end);
                break;
            }
            if (n > 0.0) t = std::move(secant);
            state = std::move(next);
            p_cur = p_new;
            record(state, p_cur, false, false);
            if (stop_if_unstable(p_cur)) break;
            if (++successes >= 2) {
                ds = std::min(2.0 * ds, ds_nominal);
                successes = 0;
            }
        }
        result.instabilities = detect_instability(result);
        return result;
    }

    double p_cur = targets[0];
    for (std::size_t k = 1; k < targets.size(); ++k) {
        const double target = targets[k];
        double dp = target - p_cur;
        bool snapped = false;
        int successes = 0;
        while (p_cur != target) {
            if (std::abs(dp) > std::abs(target - p_cur)) dp = target - p_cur;
            const double p_try = std::abs(target - p_cur - dp) < 1e-12 * std::abs(dp) ? target : p_cur + dp;
            const VecX guess = state.u + system.homogeneous(p_try) - system.homogeneous(p_cur);
            const bool at_min = std::abs(dp) <= min_step * (1.0 + 1e-9);
            NewtonResult next;
            bool ok = false, jump = false;
            try {
                next = newton_solve(system, p_try, guess, opt.newton);
                ok = true;
                jump = program.jump_limit > 0.0 && max_nodal(next.u - guess) > program.jump_limit;
            } catch (const ConvergenceError&) {
                ok = false;
            }
            if (!ok && at_min) {
                try {
                    next = descent_solve(system, p_try, guess, opt.newton);
                    ok = true;
                    jump = true;
                } catch (const ConvergenceError& e) {
                    result.terminated = true;
                    result.solver_failure = true;
                    result.termination = std::string("solver failure at parameter ") + std::to_string(p_try) +
                                         ": " + e.what();
                    result.instabilities = detect_instability(result);
                    return result;
                }
            }
            if (ok && (!jump || at_min)) {
                state = std::move(next);
                p_cur = p_try;
                snapped = snapped || jump;
                if (p_cur != target && program.record_substeps) record(state, p_cur, true, jump);
                if (++successes >= 2) {
                    dp *= 2.0;
                    successes = 0;
                }
                continue;
            }
            successes = 0;
            dp = std::copysign(std::max(0.5 * std::abs(dp), min_step), dp);
        }
        record(state, target, false, snapped);
        if (stop_if_unstable(target)) break;
    }
    result.instabilities = detect_instability(result);
    return result;
}

} // namespace shellmodal
