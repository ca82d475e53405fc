#include "cmc/model.hpp"

#include <cmath>
#include <string>

namespace cmc {

const CmcModel& validate_model(const CmcModel& m) {
    if (m.d < 1 || m.k < 1) throw DimensionMismatch("model needs d >= 1 and k >= 1");
    if (static_cast<int>(m.matrices.size()) != m.k)
        throw DimensionMismatch("expected " + std::to_string(m.k) + " matrices, have " +
                                std::to_string(m.matrices.size()));
    for (int l = 0; l < m.k; ++l) {
        const Matrix& M = m.matrices[l];
        if (M.rows != m.d || M.cols != m.d)
            throw DimensionMismatch("matrix " + std::to_string(l) + " is not d x d");
        for (int s = 0; s < m.d; ++s) {
            // negativity first: it is the sharper defect even when another
            // entry in the same row also breaks the [0,1] range
            for (int t = 0; t < m.d; ++t)
                if (M(s, t) < 0.0)
                    throw NegativeEntryError("matrix " + std::to_string(l) + " entry (" +
                                             std::to_string(s) + "," + std::to_string(t) +
                                             ") is negative");
            double sum = 0.0;
            for (int t = 0; t < m.d; ++t) {
                double v = M(s, t);
                if (v > 1.0)
                    throw RowSumError("matrix " + std::to_string(l) + " entry (" +
                                      std::to_string(s) + "," + std::to_string(t) +
                                      ") exceeds 1");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw RowSumError("matrix " + std::to_string(l) + " row " + std::to_string(s) +
                                  " sums to " + std::to_string(sum));
        }
    }
    return m;
}

Distribution validate_distribution(Distribution dist) {
    double sum = 0.0;
    for (double v : dist.w) {
        if (v < 0.0) throw NegativeEntryError("distribution has a negative weight");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
        throw RowSumError("distribution sums to " + std::to_string(sum));
    return dist;
}

Distribution stationary_distribution(const Matrix& M) {
    return Distribution{power_iteration_stationary(M)};
}

Matrix paired_chain(const CmcModel& model, const Matrix& P) {
    validate_model(model);
    if (P.rows != model.d || P.cols != model.k)
        throw DimensionMismatch("policy table must be d x k");
    for (int s = 0; s < model.d; ++s)
        if (std::abs(P.row_sum(s) - 1.0) > kRowSumTol)
            throw RowSumError("policy table row " + std::to_string(s) + " does not sum to 1");

    int n = model.d * model.k;
    Matrix Q(n, n);
    for (int s = 0; s < model.d; ++s)
        for (int l = 0; l < model.k; ++l)
            for (int t = 0; t < model.d; ++t)
                for (int lp = 0; lp < model.k; ++lp)
                    Q(pair_index(s, l, model.k), pair_index(t, lp, model.k)) =
                        model.matrices[l](s, t) * P(t, lp);
    return Q;
}

Distribution uniform_distribution(int n) {
    return Distribution{std::vector<double>(n, 1.0 / n)};
}

}  // namespace cmc
