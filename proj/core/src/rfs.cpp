#include "trajcon/rfs.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace trajcon {
namespace {

constexpr double kWeightTolerance = 1e-12;

void append_prefixed(std::vector<std::string>& out, const std::string& prefix,
                     const std::vector<std::string>& issues) {
    for (const auto& s : issues) out.push_back(prefix + s);
}

}  // namespace

double PmbmDensity::expected_cardinality() const {
    double n = ppp.mu;
    for (const auto& h : hypotheses) {
        double tracks = 0.0;
        for (const auto& b : h.tracks) tracks += b.r;
        n += h.weight * tracks;
    }
    return n;
}

std::vector<std::string> validate(const BernoulliTrajectory& b) {
    std::vector<std::string> issues;
    if (!(b.r >= 0.0 && b.r <= 1.0)) {
        std::ostringstream os;
        os << "existence probability r = " << b.r << " outside [0,1]";
        issues.push_back(os.str());
    }
    if (b.degenerate && b.r != 0.0) issues.emplace_back("degenerate Bernoulli must have r = 0");
    append_prefixed(issues, "density: ", check_density(b.density));
    return issues;
}

std::vector<std::string> validate(const PppTrajectory& p) {
    std::vector<std::string> issues;
    if (p.degenerate) {
        if (p.mu != 0.0) issues.emplace_back("degenerate PPP must have mu = 0");
    } else if (!(p.mu > 0.0) || !std::isfinite(p.mu)) {
        std::ostringstream os;
        os << "PPP intensity scale mu = " << p.mu << " must be positive and finite";
        issues.push_back(os.str());
    }
    append_prefixed(issues, "density: ", check_density(p.density));
    return issues;
}

std::vector<std::string> validate(const PmbmDensity& m) {
    std::vector<std::string> issues;
    append_prefixed(issues, "ppp: ", validate(m.ppp));
    if (m.hypotheses.empty()) issues.emplace_back("PMBM needs at least one global hypothesis");
    double sum = 0.0;
    const auto dim = m.state_dim();
    for (std::size_t a = 0; a < m.hypotheses.size(); ++a) {
        const auto& h = m.hypotheses[a];
        const std::string prefix = "hypothesis " + std::to_string(a) + ": ";
        if (!(h.weight >= 0.0)) issues.push_back(prefix + "negative weight");
        sum += h.weight;
        for (std::size_t i = 0; i < h.tracks.size(); ++i) {
            const std::string tp = prefix + "track " + std::to_string(i) + ": ";
            append_prefixed(issues, tp, validate(h.tracks[i]));
            if (h.tracks[i].density.state_dim() != dim) issues.push_back(tp + "state dimension differs from PPP");
        }
    }
    if (!m.hypotheses.empty() && !(std::abs(sum - 1.0) <= kWeightTolerance)) {
        std::ostringstream os;
        os.precision(17);
        os << "hypothesis weights sum to " << sum << ", expected 1";
        issues.push_back(os.str());
    }
    return issues;
}

void require_valid(const PmbmDensity& m) {
    const auto issues = validate(m);
    if (issues.empty()) return;
    std::string msg = "invalid PMBM density:";
    for (const auto& s : issues) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

BernoulliSampler::BernoulliSampler(const BernoulliTrajectory& b) : r_(b.r) {
    if (!(b.r >= 0.0 && b.r <= 1.0)) throw std::invalid_argument("Bernoulli r outside [0,1]");
    if (r_ > 0.0) inner_.emplace(b.density);
}

std::vector<Trajectory> BernoulliSampler::draw(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (!(u(rng) < r_)) return {};
    return {inner_->draw(rng)};
}

PppSampler::PppSampler(const PppTrajectory& p) : mu_(p.mu) {
    if (!(p.mu >= 0.0) || !std::isfinite(p.mu)) throw std::invalid_argument("PPP mu must be finite and >= 0");
    if (mu_ > 0.0) inner_.emplace(p.density);
}

std::vector<Trajectory> PppSampler::draw(Rng& rng) const {
    if (mu_ <= 0.0) return {};
    std::poisson_distribution<std::size_t> count(mu_);
    const std::size_t n = count(rng);
    std::vector<Trajectory> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(inner_->draw(rng));
    return out;
}

PmbmSampler::PmbmSampler(const PmbmDensity& m) : ppp_(m.ppp) {
    require_valid(m);
    std::vector<double> weights;
    for (const auto& h : m.hypotheses) {
        weights.push_back(h.weight);
        auto& row = tracks_.emplace_back();
        for (const auto& b : h.tracks) row.emplace_back(b);
    }
    pick_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
}

std::vector<Trajectory> PmbmSampler::draw(Rng& rng) const {
    const std::size_t a = pick_(rng);
    auto out = ppp_.draw(rng);
    for (const auto& b : tracks_[a]) {
        for (auto& t : b.draw(rng)) out.push_back(std::move(t));
    }
    return out;
}

std::vector<Trajectory> sample_bernoulli(const BernoulliTrajectory& b, Rng& rng) {
    return BernoulliSampler(b).draw(rng);
}

std::vector<Trajectory> sample_bernoulli(const BernoulliTrajectory& b, std::uint64_t seed) {
    Rng rng(seed);
    return sample_bernoulli(b, rng);
}

std::vector<Trajectory> sample_ppp(const PppTrajectory& p, Rng& rng) { return PppSampler(p).draw(rng); }

std::vector<Trajectory> sample_ppp(const PppTrajectory& p, std::uint64_t seed) {
    Rng rng(seed);
    return sample_ppp(p, rng);
}

std::vector<Trajectory> sample_pmbm(const PmbmDensity& m, Rng& rng) { return PmbmSampler(m).draw(rng); }

std::vector<Trajectory> sample_pmbm(const PmbmDensity& m, std::uint64_t seed) {
    Rng rng(seed);
    return sample_pmbm(m, rng);
}

}  // namespace trajcon
