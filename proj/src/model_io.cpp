#include "rfsad/model_io.hpp"

#include "rfsad/errors.hpp"
#include "rfsad/fileutil.hpp"

#include <fstream>
#include <sstream>

namespace rfsad {

nlohmann::json model_to_json(const ModelParams& model)
{
    nlohmann::json doc;
    doc["version"] = kModelFileVersion;
    doc["dim"] = model.dim;
    doc["rho"] = model.rho;
    doc["alpha"] = model.alpha;
    doc["n_train_sets"] = model.n_train_sets;
    doc["n_train_points"] = model.n_train_points;
    doc["mu"] = std::vector<double>(model.mu.data(), model.mu.data() + model.mu.size());
    std::vector<double> sigma;
    sigma.reserve(model.dim * model.dim);
    for (Eigen::Index r = 0; r < model.sigma_shrunk.rows(); ++r)
        for (Eigen::Index c = 0; c < model.sigma_shrunk.cols(); ++c)
            sigma.push_back(model.sigma_shrunk(r, c));
    doc["sigma_shrunk"] = std::move(sigma);
    return doc;
}

ModelParams model_from_json(const nlohmann::json& doc)
{
    try {
        if (doc.at("version").get<int>() != kModelFileVersion)
            throw FormatError("unsupported model file version " + doc.at("version").dump());
        const auto dim = doc.at("dim").get<std::size_t>();
        const auto mu = doc.at("mu").get<std::vector<double>>();
        const auto sigma = doc.at("sigma_shrunk").get<std::vector<double>>();
        if (dim == 0 || mu.size() != dim || sigma.size() != dim * dim)
            throw FormatError("model file: mu needs D values and sigma_shrunk D*D values");

        const auto d = static_cast<Eigen::Index>(dim);
        Eigen::VectorXd mu_vec = Eigen::Map<const Eigen::VectorXd>(mu.data(), d);
        Eigen::MatrixXd sigma_mat(d, d);
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = 0; c < d; ++c)
                sigma_mat(r, c) = sigma[static_cast<std::size_t>(r * d + c)];
        return assemble_model(dim, doc.at("rho").get<double>(), std::move(mu_vec), std::move(sigma_mat),
                              doc.at("alpha").get<double>(), doc.at("n_train_sets").get<std::size_t>(),
                              doc.at("n_train_points").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
}

void write_model(const ModelParams& model, const std::filesystem::path& path)
{
    validate_model(model);
    write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

ModelParams read_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    try {
        return model_from_json(doc);
    } catch (const Error& e) {
        throw ModelError(path.string() + ": " + e.what());
    }
}

} // namespace rfsad
