#pragma once

#include "metral/algebra.hpp"

namespace metral {

/// The spin factor of a symmetric positive definite m x m form f: the
/// (m+1)-dimensional algebra on basis {eps, u_1..u_m} with eps eps = eps,
/// eps u_i = u_i, u_i u_j = f[i,j] eps, carrying the trace form as Gram:
/// G[0,0] = 2, G[0,i] = 0, G[i,j] = 2 f[i,j]. All entries are exact, so
/// validate() passes with zero defect and |eps|^2 = 2 exactly.
AlgebraSpec spin_factor(const Mat& f);

/// Real symmetric n x n matrices with product (XY + YX)/2 in the orthonormal
/// coordinate basis {E_ii} followed by {(E_ij + E_ji)/sqrt(2), i < j}, with
/// the trace form as Gram (exactly the identity matrix in this basis). The
/// unit is the identity matrix with squared length n.
AlgebraSpec sym_jordan(int n);

/// Block-diagonal direct sum: components multiply independently and are
/// orthogonal to each other. Unital iff both summands are.
AlgebraSpec direct_sum(const AlgebraSpec& A, const AlgebraSpec& B);

/// The one-dimensional unital algebra R with G = [1].
AlgebraSpec real_line();

/// R (+) R: componentwise product on R^2 with the identity Gram. Its full
/// idempotent set is {0, (1,0), (0,1), (1,1)}.
AlgebraSpec rsquare();

}  // namespace metral
