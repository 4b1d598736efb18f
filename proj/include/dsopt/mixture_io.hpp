#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "dsopt/engine.hpp"

namespace dsopt {

constexpr int kMixtureFormatVersion = 1;

class MixtureFormatError : public std::runtime_error {
public:
    MixtureFormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Flat text format:
///   dsopt-mixture <version>
///   model <kind>
///   mode <joint|product>
///   n <components>
///   node_count <N>
///   seed <seed>
///   meta <key> <value>          (zero or more)
///   component <tokens>          (n lines)
///   alpha <a_1> ... <a_n>
/// Lines starting with '#' are comments. Reals use shortest round-trip decimal.
void write_mixture(const TrainedMixture& mixture, std::ostream& out);
TrainedMixture read_mixture(std::istream& in);

void save_mixture(const TrainedMixture& mixture, const std::filesystem::path& path);
TrainedMixture load_mixture(const std::filesystem::path& path);

}  // namespace dsopt
