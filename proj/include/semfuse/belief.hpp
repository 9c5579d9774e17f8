#pragma once

#include <Eigen/Core>

namespace semfuse {

// Per-instance probability distribution over the closed-set classes,
// maintained as a running average of measurement likelihood vectors.
struct SemanticBelief {
    Eigen::VectorXd probs;
    int frame_count = 0;  // number of fused detection updates

    static SemanticBelief uniform(int num_classes);
    void validate(double tol = 1e-9) const;
};

// new = (likelihood + t * old) / (t + 1), renormalized; frame_count += 1.
void bayes_update(SemanticBelief &belief, const Eigen::VectorXd &likelihood);

// argmax class; ties broken by lowest index; throws if frame_count == 0.
int predict_class(const SemanticBelief &belief);

// Dot product of the two probability vectors; throws if either has t == 0.
double semantic_similarity(const SemanticBelief &a, const SemanticBelief &b);

}  // namespace semfuse
