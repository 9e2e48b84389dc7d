#include "ssmshrink/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ssmshrink
{

using nlohmann::json;

namespace
{

json complex_json(cplx z)
{
    return json::array({z.real(), z.imag()});
}

cplx complex_from(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw FormatError(where + ": expected a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_json(const CMatrix& X)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < X.rows(); ++i)
    {
        json row = json::array();
        for (Eigen::Index k = 0; k < X.cols(); ++k)
            row.push_back(complex_json(X(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw FormatError(where + ": expected a non-empty list of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    CMatrix X(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
    {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw FormatError(where + ": ragged matrix");
        for (Eigen::Index k = 0; k < cols; ++k)
            X(i, k) = complex_from(row[static_cast<std::size_t>(k)], where);
    }
    return X;
}

json real_vector_json(const RVector& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

RVector real_vector_from(const json& j, const std::string& where)
{
    if (!j.is_array())
        throw FormatError(where + ": expected a list of reals");
    RVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        if (!j[i].is_number())
            throw FormatError(where + ": expected a list of reals");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

const json& field(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw FormatError(where + ": missing field '" + key + "'");
    return obj.at(key);
}

} // namespace

json model_to_json(const DeepSsm& model)
{
    json layers = json::array();
    for (const auto& layer : model.layers())
    {
        const auto& s = layer.system;
        json lambda = json::array();
        for (Eigen::Index i = 0; i < s.lambda().size(); ++i)
            lambda.push_back(complex_json(s.lambda()(i)));
        json U = json::array();
        for (const auto& Uj : s.U())
            U.push_back(matrix_json(Uj));
        json entry;
        entry["lambda"] = std::move(lambda);
        entry["B"] = matrix_json(s.B());
        entry["C"] = matrix_json(s.C());
        entry["U"] = std::move(U);
        entry["ln_gamma1"] = real_vector_json(layer.ln.gamma1);
        entry["ln_gamma2"] = real_vector_json(layer.ln.gamma2);
        entry["ln_eps"] = layer.ln.eps;
        layers.push_back(std::move(entry));
    }
    json out;
    out["format_version"] = kModelFormatVersion;
    out["layers"] = std::move(layers);
    return out;
}

DeepSsm model_from_json(const json& j)
{
    const auto& version = field(j, "format_version", "model");
    if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
        throw FormatError("model: unsupported format_version");
    const auto& layers = field(j, "layers", "model");
    if (!layers.is_array() || layers.empty())
        throw FormatError("model: 'layers' must be a non-empty list");

    std::vector<DssmLayer> out;
    for (std::size_t i = 0; i < layers.size(); ++i)
    {
        const std::string where = "layer " + std::to_string(i);
        const auto& L = layers[i];
        const auto& jl = field(L, "lambda", where);
        if (!jl.is_array() || jl.empty())
            throw FormatError(where + ": 'lambda' must be a non-empty list");
        CVector lambda(static_cast<Eigen::Index>(jl.size()));
        for (std::size_t k = 0; k < jl.size(); ++k)
            lambda(static_cast<Eigen::Index>(k)) = complex_from(jl[k], where + ".lambda");
        const auto& ju = field(L, "U", where);
        if (!ju.is_array())
            throw FormatError(where + ": 'U' must be a list of matrices");
        std::vector<CMatrix> U;
        for (std::size_t k = 0; k < ju.size(); ++k)
            U.push_back(matrix_from(ju[k], where + ".U"));
        if (U.empty())
            throw FormatError(where + ": 'U' must not be empty");
        LayerNormParams ln;
        ln.gamma1 = real_vector_from(field(L, "ln_gamma1", where), where + ".ln_gamma1");
        ln.gamma2 = real_vector_from(field(L, "ln_gamma2", where), where + ".ln_gamma2");
        const auto& eps = field(L, "ln_eps", where);
        if (!eps.is_number())
            throw FormatError(where + ": 'ln_eps' must be a number");
        ln.eps = eps.get<double>();
        ln.validate();
        out.push_back({LqoSystem(std::move(lambda), matrix_from(field(L, "B", where), where + ".B"),
                                 matrix_from(field(L, "C", where), where + ".C"), std::move(U)),
                       std::move(ln)});
    }
    return DeepSsm(std::move(out));
}

std::string dump_model(const DeepSsm& model)
{
    return model_to_json(model).dump(1) + "\n";
}

void save_model(const DeepSsm& model, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw FormatError("cannot open '" + path + "' for writing");
    os << dump_model(model);
    if (!os)
        throw FormatError("write failed for '" + path + "'");
}

DeepSsm load_model(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw FormatError("cannot open model file '" + path + "'");
    json j;
    try
    {
        j = json::parse(is);
    }
    catch (const json::parse_error& e)
    {
        throw FormatError(path + ": " + e.what());
    }
    return model_from_json(j);
}

RealSignal load_signal(const std::string& path, bool skip_header)
{
    std::ifstream is(path);
    if (!is)
        throw FormatError("cannot open signal file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    if (skip_header)
    {
        std::getline(is, line);
        ++lineno;
    }
    while (std::getline(is, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            const auto b = cell.find_first_not_of(" \t");
            const auto e = cell.find_last_not_of(" \t");
            double v = 0.0;
            const char* first = b == std::string::npos ? cell.data() : cell.data() + b;
            const char* last = b == std::string::npos ? cell.data() : cell.data() + e + 1;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last || !std::isfinite(v))
                throw FormatError(path + ":" + std::to_string(lineno) + ": bad value '" + cell +
                                  "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError(path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw FormatError(path + ": no samples");
    RealSignal s(static_cast<Eigen::Index>(rows.front().size()),
                 static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (std::size_t i = 0; i < rows[k].size(); ++i)
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[k][i];
    return s;
}

std::string format_double(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

void save_signal(const RealSignal& s, const std::string& path)
{
    std::ofstream os(path);
    if (!os)
        throw FormatError("cannot open '" + path + "' for writing");
    for (Eigen::Index k = 0; k < s.cols(); ++k)
    {
        for (Eigen::Index i = 0; i < s.rows(); ++i)
            os << (i ? "," : "") << format_double(s(i, k));
        os << '\n';
    }
}

std::string report_csv(const ReductionReport& report)
{
    std::ostringstream os;
    os << "iter,objective,grad_norm,backtracks,eta_scale\n";
    for (const auto& r : report.rows)
        os << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.grad_norm)
           << ',' << r.backtracks << ',' << format_double(r.step_scales[0]) << '\n';
    return os.str();
}

int threads_from_env()
{
    const char* v = std::getenv("SSMSHRINK_THREADS");
    if (!v)
        return 1;
    int n = 0;
    const std::string s(v);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc() || ptr != s.data() + s.size() || n < 1)
        return 1;
    return n;
}

} // namespace ssmshrink
