#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include <dcgme/archive.hpp>
#include <dcgme/serialize.hpp>

namespace dcgme {

    namespace detail {
        inline std::string cell_file_name(std::size_t cell)
        {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "cell_%05zu.bin", cell);
            return buf;
        }
    } // namespace detail

    // Layout: <dir>/index.json, <dir>/genotype.arch, <dir>/elites/cell_*.bin
    inline void save_archive(const std::filesystem::path& dir, const Archive& archive,
        const MlpArch& genotype_arch)
    {
        namespace fs = std::filesystem;
        fs::create_directories(dir / "elites");
        save_mlp_arch(dir / "genotype.arch", genotype_arch);

        nlohmann::json index;
        index["descriptor_dim"] = archive.centroids.dim;
        index["centroid_count"] = archive.centroids.count();
        index["centroids"] = nlohmann::json::array();
        for (std::size_t i = 0; i < archive.centroids.count(); i++) {
            auto p = archive.centroids.point(i);
            index["centroids"].push_back(std::vector<double>(p.begin(), p.end()));
        }
        index["cells"] = nlohmann::json::array();
        for (std::size_t i = 0; i < archive.cells.size(); i++) {
            if (!archive.cells[i])
                continue;
            const Elite& e = *archive.cells[i];
            const std::string file = detail::cell_file_name(i);
            save_param_vector(dir / "elites" / file, e.genotype);
            index["cells"].push_back({{"cell", i}, {"fitness", e.fitness},
                {"descriptor", e.descriptor}, {"genotype", "elites/" + file}});
        }
        std::ofstream os(dir / "index.json");
        if (!os)
            throw std::runtime_error("cannot write archive index: " + (dir / "index.json").string());
        os << index.dump(2) << '\n';
    }

    // with_genotypes=false loads metadata only (descriptors and fitness), which
    // is all plotting needs.
    inline std::pair<Archive, MlpArch> load_archive(const std::filesystem::path& dir,
        bool with_genotypes = true)
    {
        std::ifstream is(dir / "index.json");
        if (!is)
            throw std::runtime_error("cannot read archive index: " + (dir / "index.json").string());
        nlohmann::json index = nlohmann::json::parse(is);

        Centroids c;
        c.dim = index.at("descriptor_dim").get<std::size_t>();
        for (const auto& pt : index.at("centroids"))
            for (const auto& v : pt)
                c.flat.push_back(v.get<double>());
        if (c.count() != index.at("centroid_count").get<std::size_t>())
            throw std::runtime_error("archive index: centroid count mismatch");

        Archive archive(std::move(c));
        MlpArch arch = load_mlp_arch(dir / "genotype.arch");
        for (const auto& cell : index.at("cells")) {
            Elite e;
            e.fitness = cell.at("fitness").get<double>();
            e.descriptor = cell.at("descriptor").get<std::vector<double>>();
            if (with_genotypes) {
                e.genotype = load_param_vector(dir / cell.at("genotype").get<std::string>());
                if (e.genotype.size() != arch.param_count())
                    throw std::runtime_error("archive elite: parameter count does not match arch");
            }
            archive.cells.at(cell.at("cell").get<std::size_t>()) = std::move(e);
        }
        return {std::move(archive), std::move(arch)};
    }

    // CSV of (cell, fitness, descriptor...) in cell order.
    inline void export_archive_csv(const std::filesystem::path& path, const Archive& archive)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot write archive csv: " + path.string());
        os << "cell,fitness";
        for (std::size_t j = 0; j < archive.centroids.dim; j++)
            os << ",descriptor_" << j;
        os << '\n';
        char buf[64];
        for (std::size_t i = 0; i < archive.cells.size(); i++) {
            if (!archive.cells[i])
                continue;
            const Elite& e = *archive.cells[i];
            os << i;
            std::snprintf(buf, sizeof(buf), ",%.17g", e.fitness);
            os << buf;
            for (double d : e.descriptor) {
                std::snprintf(buf, sizeof(buf), ",%.17g", d);
                os << buf;
            }
            os << '\n';
        }
    }

} // namespace dcgme
