#include "dsopt/mixture_io.hpp"

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "dsopt/text.hpp"

namespace dsopt {

void write_mixture(const TrainedMixture& mixture, std::ostream& out) {
    if (mixture.basis.size() != mixture.alpha.size()) {
        throw std::invalid_argument("write_mixture: basis and alpha lengths differ");
    }
    out << "dsopt-mixture " << kMixtureFormatVersion << '\n';
    out << "model " << mixture.model_kind << '\n';
    out << "mode " << draw_mode_name(mixture.mode) << '\n';
    out << "n " << mixture.basis.size() << '\n';
    out << "node_count " << mixture.node_count << '\n';
    out << "seed " << mixture.seed << '\n';
    for (const auto& [key, value] : mixture.provenance) {
        if (key.empty() || key.find_first_of(" \t\n") != std::string::npos || value.find('\n') != std::string::npos) {
            throw std::invalid_argument("write_mixture: provenance entries must be single-token keys on one line");
        }
        out << "meta " << key << ' ' << value << '\n';
    }
    for (const auto& c : mixture.basis.components()) out << "component " << c.serialize() << '\n';
    out << "alpha";
    for (std::size_t i = 0; i < mixture.alpha.size(); ++i) out << ' ' << format_real(mixture.alpha[i]);
    out << '\n';
}

TrainedMixture read_mixture(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::string model_kind;
    std::optional<DrawMode> mode;
    std::optional<std::size_t> n, node_count;
    std::optional<std::uint64_t> seed;
    std::map<std::string, std::string> meta;
    std::vector<BasicDistribution> components;
    std::optional<Eigen::VectorXd> alpha;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto tokens = split_whitespace(body);
        const std::string_view key = tokens[0];
        try {
            if (!have_header) {
                if (key != "dsopt-mixture" || tokens.size() != 2) {
                    throw MixtureFormatError(line_no, "expected 'dsopt-mixture <version>' header");
                }
                const auto version = parse_int(tokens[1]);
                if (version != kMixtureFormatVersion) {
                    throw MixtureFormatError(line_no, "version mismatch: file has version " + std::to_string(version) +
                                                          ", reader supports " +
                                                          std::to_string(kMixtureFormatVersion));
                }
                have_header = true;
            } else if (key == "model" && tokens.size() == 2) {
                model_kind = std::string(tokens[1]);
            } else if (key == "mode" && tokens.size() == 2) {
                mode = draw_mode_from_name(std::string(tokens[1]));
            } else if (key == "n" && tokens.size() == 2) {
                n = parse_uint(tokens[1]);
            } else if (key == "node_count" && tokens.size() == 2) {
                node_count = parse_uint(tokens[1]);
            } else if (key == "seed" && tokens.size() == 2) {
                seed = parse_uint(tokens[1]);
            } else if (key == "meta" && tokens.size() >= 2) {
                const auto rest = body.substr(body.find(tokens[1]) + tokens[1].size());
                meta[std::string(tokens[1])] = std::string(trim(rest));
            } else if (key == "component") {
                components.push_back(BasicDistribution::parse(body.substr(key.size())));
            } else if (key == "alpha") {
                Eigen::VectorXd a(static_cast<Eigen::Index>(tokens.size() - 1));
                for (std::size_t i = 1; i < tokens.size(); ++i) a[static_cast<Eigen::Index>(i - 1)] = parse_real(tokens[i]);
                alpha = std::move(a);
            } else {
                throw MixtureFormatError(line_no, "unrecognized line '" + std::string(body) + "'");
            }
        } catch (const MixtureFormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw MixtureFormatError(line_no, e.what());
        }
    }
    if (!have_header) throw MixtureFormatError(line_no, "missing 'dsopt-mixture' header");
    if (model_kind.empty() || !mode || !n || !node_count || !seed || !alpha) {
        throw MixtureFormatError(line_no, "incomplete mixture file (need model, mode, n, node_count, seed, alpha)");
    }
    if (components.size() != *n || static_cast<std::size_t>(alpha->size()) != *n) {
        throw MixtureFormatError(line_no, "component/alpha count does not match n = " + std::to_string(*n));
    }
    try {
        return TrainedMixture{MixtureBasis(std::move(components)), SimplexVector(std::move(*alpha)), *mode,
                              *node_count, *seed, model_kind, std::move(meta)};
    } catch (const std::invalid_argument& e) {
        throw MixtureFormatError(line_no, e.what());
    }
}

void save_mixture(const TrainedMixture& mixture, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_mixture(mixture, out);
}

TrainedMixture load_mixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_mixture(in);
}

}  // namespace dsopt
