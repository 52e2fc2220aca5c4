#include "r1nrsfm/types.hpp"

namespace r1nrsfm {

std::string to_string(Variant v) {
    return v == Variant::Pca ? "pca" : "ica";
}

Variant variant_from_string(const std::string& s) {
    if (s == "pca") return Variant::Pca;
    if (s == "ica") return Variant::Ica;
    throw std::invalid_argument("unknown variant '" + s + "' (expected pca or ica)");
}

TrackTable::TrackTable(Eigen::MatrixXd coords, std::vector<std::string> labels)
    : coords_(std::move(coords)), labels_(std::move(labels)) {
    if (coords_.size() == 0) throw std::invalid_argument("tracks: empty coordinate matrix");
    if (coords_.rows() % 2 != 0)
        throw std::invalid_argument("tracks: coordinate matrix needs an even row count");
    if (!coords_.allFinite()) throw std::invalid_argument("tracks: non-finite coordinate");
    if (!labels_.empty() && static_cast<int>(labels_.size()) != points())
        throw std::invalid_argument("tracks: label count does not match point count");
}

}  // namespace r1nrsfm
