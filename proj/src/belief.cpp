#include "semfuse/belief.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace semfuse {

SemanticBelief SemanticBelief::uniform(int num_classes) {
    if (num_classes <= 0) throw std::invalid_argument("belief needs at least one class");
    SemanticBelief b;
    b.probs = Eigen::VectorXd::Constant(num_classes, 1.0 / num_classes);
    return b;
}

void SemanticBelief::validate(double tol) const {
    if (probs.size() == 0) throw std::logic_error("belief has no classes");
    if ((probs.array() < 0.0).any()) throw std::logic_error("belief has negative probability");
    double sum = probs.sum();
    if (std::abs(sum - 1.0) > tol)
        throw std::logic_error(fmt::format("belief sums to {} (tolerance {})", sum, tol));
    if (frame_count < 0) throw std::logic_error("belief frame_count negative");
}

void bayes_update(SemanticBelief &belief, const Eigen::VectorXd &likelihood) {
    if (likelihood.size() != belief.probs.size())
        throw std::invalid_argument("likelihood size does not match belief");
    double t = static_cast<double>(belief.frame_count);
    Eigen::VectorXd next = (likelihood + t * belief.probs) / (t + 1.0);
    double sum = next.sum();
    if (sum <= 0.0)
        next.setConstant(1.0 / static_cast<double>(next.size()));
    else
        next /= sum;
    belief.probs = std::move(next);
    belief.frame_count += 1;
}

int predict_class(const SemanticBelief &belief) {
    if (belief.frame_count < 1)
        throw std::logic_error("cannot predict class from a belief with no evidence");
    int best = 0;
    for (int i = 1; i < belief.probs.size(); ++i)
        if (belief.probs[i] > belief.probs[best]) best = i;
    return best;
}

double semantic_similarity(const SemanticBelief &a, const SemanticBelief &b) {
    if (a.frame_count < 1 || b.frame_count < 1)
        throw std::logic_error("semantic similarity requires beliefs with evidence");
    if (a.probs.size() != b.probs.size())
        throw std::invalid_argument("belief sizes differ");
    return a.probs.dot(b.probs);
}

}  // namespace semfuse
