#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "embounds/common.hpp"

namespace embounds {

// Real symmetric SDP in standard form:
//     maximize   tr(C M)
//     subject to tr(A_k M) = b_k,   M >= 0 (PSD), M symmetric dim x dim.
//
// complex_dim/has_slack describe the layout when the data came from the
// complex-to-real embedding: the leading 2*complex_dim rows hold the two
// real copies, and an optional trailing diagonal slack entry carries the
// corner inequality. Both are zero/false for plain real problems.
struct RealSdpData {
    int dim = 0;
    RMatrix cost;
    std::vector<RMatrix> constraints;
    RVector rhs;
    int complex_dim = 0;
    bool has_slack = false;

    // Symmetry of cost and constraints to 1e-14 (relative), shape agreement.
    void validate() const;
};

// Plain-text sparse exchange format (upper-triangle index/value triplets):
//
//   sdp 1
//   dim <m> constraints <p> complex_dim <mc> slack <0|1>
//   C <nnz>
//   <i> <j> <value>
//   A <k> <b_k> <nnz>
//   <i> <j> <value>
//   ...
//   end
void dump_sparse(const RealSdpData& data, std::ostream& out);
RealSdpData load_sparse(std::istream& in);

void save_sdp(const RealSdpData& data, const std::string& path);
RealSdpData load_sdp(const std::string& path);

}  // namespace embounds
