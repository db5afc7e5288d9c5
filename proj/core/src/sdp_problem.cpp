#include "embounds/sdp_problem.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace embounds {

namespace {

void check_symmetric(const RMatrix& m, const std::string& name) {
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
        throw ValidationError(name + " is not symmetric");
}

void write_triplets(const RMatrix& m, std::ostream& out) {
    std::vector<std::tuple<int, int, double>> nnz;
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i <= j; ++i)
            if (m(i, j) != 0.0) nnz.emplace_back(i, j, m(i, j));
    out << nnz.size() << "\n";
    for (const auto& [i, j, v] : nnz)
        out << i << " " << j << " " << std::setprecision(17) << v << "\n";
}

RMatrix read_triplets(std::istream& in, int dim, long long nnz) {
    RMatrix m = RMatrix::Zero(dim, dim);
    for (long long k = 0; k < nnz; ++k) {
        int i, j;
        double v;
        if (!(in >> i >> j >> v))
            throw ValidationError("sdp dump: truncated triplet list");
        if (i < 0 || j < 0 || i >= dim || j >= dim || i > j)
            throw ValidationError("sdp dump: triplet index out of range");
        m(i, j) = v;
        m(j, i) = v;
    }
    return m;
}

}  // namespace

void RealSdpData::validate() const {
    if (dim < 1) throw ValidationError("sdp data: dim must be >= 1");
    if (cost.rows() != dim || cost.cols() != dim)
        throw DimensionError("sdp data: cost has wrong shape");
    if (rhs.size() != static_cast<Eigen::Index>(constraints.size()))
        throw DimensionError("sdp data: rhs length != constraint count");
    check_symmetric(cost, "cost");
    for (std::size_t k = 0; k < constraints.size(); ++k) {
        if (constraints[k].rows() != dim || constraints[k].cols() != dim)
            throw DimensionError("sdp data: constraint " + std::to_string(k) +
                                 " has wrong shape");
        check_symmetric(constraints[k], "constraint " + std::to_string(k));
    }
}

void dump_sparse(const RealSdpData& data, std::ostream& out) {
    data.validate();
    out << "sdp 1\n";
    out << "dim " << data.dim << " constraints " << data.constraints.size()
        << " complex_dim " << data.complex_dim << " slack "
        << (data.has_slack ? 1 : 0) << "\n";
    out << "C ";
    write_triplets(data.cost, out);
    for (std::size_t k = 0; k < data.constraints.size(); ++k) {
        out << "A " << k << " " << std::setprecision(17) << data.rhs(k) << " ";
        write_triplets(data.constraints[k], out);
    }
    out << "end\n";
}

RealSdpData load_sparse(std::istream& in) {
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "sdp" || version != 1)
        throw ValidationError("sdp dump: unknown header/version");
    RealSdpData data;
    std::size_t p = 0;
    int slack = 0;
    std::string kw_dim, kw_con, kw_cdim, kw_slack;
    if (!(in >> kw_dim >> data.dim >> kw_con >> p >> kw_cdim >>
          data.complex_dim >> kw_slack >> slack) ||
        kw_dim != "dim" || kw_con != "constraints" ||
        kw_cdim != "complex_dim" || kw_slack != "slack")
        throw ValidationError("sdp dump: malformed size line");
    data.has_slack = slack != 0;
    long long nnz = 0;
    if (!(in >> word >> nnz) || word != "C")
        throw ValidationError("sdp dump: missing cost section");
    data.cost = read_triplets(in, data.dim, nnz);
    data.rhs.resize(static_cast<Eigen::Index>(p));
    data.constraints.reserve(p);
    for (std::size_t k = 0; k < p; ++k) {
        std::size_t idx = 0;
        double b = 0.0;
        if (!(in >> word >> idx >> b >> nnz) || word != "A" || idx != k)
            throw ValidationError("sdp dump: malformed constraint " +
                                  std::to_string(k));
        data.rhs(static_cast<Eigen::Index>(k)) = b;
        data.constraints.push_back(read_triplets(in, data.dim, nnz));
    }
    if (!(in >> word) || word != "end")
        throw ValidationError("sdp dump: missing end marker");
    data.validate();
    return data;
}

void save_sdp(const RealSdpData& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    dump_sparse(data, out);
}

RealSdpData load_sdp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return load_sparse(in);
}

}  // namespace embounds
