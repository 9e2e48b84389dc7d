#ifndef SSMSHRINK_IO_HPP
#define SSMSHRINK_IO_HPP

#include <string>

#include <nlohmann/json.hpp>

#include "ssmshrink/dssm.hpp"
#include "ssmshrink/reduce.hpp"

namespace ssmshrink
{

/// Raised for malformed files; carries the offending path or field.
class FormatError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const DeepSsm& model);
/// Validates every invariant of the model while parsing.
DeepSsm model_from_json(const nlohmann::json& j);

std::string dump_model(const DeepSsm& model);
void save_model(const DeepSsm& model, const std::string& path);
DeepSsm load_model(const std::string& path);

/// CSV with L rows and m columns; returns an m x L signal.
RealSignal load_signal(const std::string& path, bool skip_header = false);
void save_signal(const RealSignal& s, const std::string& path);

/// Columns iter,objective,grad_norm,backtracks,eta_scale; eta_scale is the
/// accepted step scale of the lambda block.
std::string report_csv(const ReductionReport& report);

/// Decimal text that parses back to the same double.
std::string format_double(double x);

/// Value of SSMSHRINK_THREADS, or 1 if unset or invalid.
int threads_from_env();

} // namespace ssmshrink

#endif // SSMSHRINK_IO_HPP
