#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include <dcgme/archive.hpp>
#include <dcgme/env.hpp>
#include <dcgme/loop.hpp>
#include <dcgme/td3.hpp>

namespace dcgme {

    namespace detail {
        inline double descriptor_distance(std::span<const double> a, std::span<const double> b)
        {
            double acc = 0.0;
            for (std::size_t i = 0; i < a.size(); i++)
                acc += (a[i] - b[i]) * (a[i] - b[i]);
            return std::sqrt(acc);
        }
    } // namespace detail

    // Sum over occupied cells of the fitness the conditioned actor reaches when
    // asked for that cell's stored descriptor.
    inline double dc_qd_score(const Archive& archive, const ActorCritic& ac, const EnvSpec& env)
    {
        if (archive.occupied_count() == 0)
            throw std::runtime_error("dc_qd_score: archive is empty");
        double total = 0.0;
        for (std::size_t i : archive.occupied_cells())
            total += rollout_actor(ac, env, archive.cells[i]->descriptor).fitness;
        return total;
    }

    enum class DemMode { archive, policy };

    // Mean distance between stored descriptors and reevaluated ones: in archive
    // mode each elite is re-rolled; in policy mode the conditioned actor is
    // rolled out against each stored descriptor.
    inline double descriptor_error_mean(const Archive& archive, const EnvSpec& env, DemMode mode,
        const MlpArch* policy_arch = nullptr, const ActorCritic* ac = nullptr)
    {
        const std::vector<std::size_t> occ = archive.occupied_cells();
        if (occ.empty())
            throw std::runtime_error("descriptor_error_mean: archive is empty");
        if (mode == DemMode::archive && policy_arch == nullptr)
            throw std::invalid_argument("descriptor_error_mean: archive mode needs the policy arch");
        if (mode == DemMode::policy && (ac == nullptr || !ac->conditioned))
            throw std::invalid_argument("descriptor_error_mean: policy mode needs a conditioned actor");
        MlpWorkspace ws;
        double total = 0.0;
        for (std::size_t i : occ) {
            const Elite& e = *archive.cells[i];
            std::vector<double> reeval;
            if (mode == DemMode::archive)
                reeval = detail::rollout_policy(env, *policy_arch, e.genotype, ws).descriptor;
            else
                reeval = rollout_actor(*ac, env, e.descriptor).descriptor;
            total += detail::descriptor_distance(e.descriptor, reeval);
        }
        return total / static_cast<double>(occ.size());
    }

    struct DistillationReport {
        double archive_qd_score = 0.0;
        double dc_qd_score = 0.0;
        double archive_dem = 0.0;
        double policy_dem = 0.0;
        struct PerCell {
            std::size_t cell = 0;
            std::vector<double> stored_descriptor;
            std::vector<double> reeval_descriptor_archive;
            std::vector<double> reeval_descriptor_policy;
            double policy_fitness = 0.0;
        };
        std::vector<PerCell> per_cell; // one row per occupied cell, in cell order
    };

    inline DistillationReport distillation_report(const Archive& archive,
        const MlpArch& policy_arch, const ActorCritic& ac, const EnvSpec& env)
    {
        const std::vector<std::size_t> occ = archive.occupied_cells();
        if (occ.empty())
            throw std::runtime_error("distillation_report: archive is empty");
        if (!ac.conditioned)
            throw std::invalid_argument("distillation_report: needs a conditioned actor");

        DistillationReport rep;
        rep.archive_qd_score = archive_metrics(archive).qd_score;
        MlpWorkspace ws;
        double arch_dem = 0.0, pol_dem = 0.0;
        for (std::size_t i : occ) {
            const Elite& e = *archive.cells[i];
            DistillationReport::PerCell row;
            row.cell = i;
            row.stored_descriptor = e.descriptor;
            row.reeval_descriptor_archive
                = detail::rollout_policy(env, policy_arch, e.genotype, ws).descriptor;
            const EvalResult actor_res = rollout_actor(ac, env, e.descriptor);
            row.reeval_descriptor_policy = actor_res.descriptor;
            row.policy_fitness = actor_res.fitness;
            rep.dc_qd_score += actor_res.fitness;
            arch_dem += detail::descriptor_distance(e.descriptor, row.reeval_descriptor_archive);
            pol_dem += detail::descriptor_distance(e.descriptor, row.reeval_descriptor_policy);
            rep.per_cell.push_back(std::move(row));
        }
        rep.archive_dem = arch_dem / static_cast<double>(occ.size());
        rep.policy_dem = pol_dem / static_cast<double>(occ.size());
        return rep;
    }

    inline void save_distillation_csv(const std::filesystem::path& path,
        const DistillationReport& rep)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot write report csv: " + path.string());
        const std::size_t dim
            = rep.per_cell.empty() ? 0 : rep.per_cell.front().stored_descriptor.size();
        os << "cell";
        for (const char* prefix : {"stored_", "reeval_archive_", "reeval_policy_"})
            for (std::size_t j = 0; j < dim; j++)
                os << ',' << prefix << j;
        os << ",policy_fitness\n";
        char buf[64];
        for (const auto& row : rep.per_cell) {
            os << row.cell;
            auto emit = [&](const std::vector<double>& v) {
                for (double x : v) {
                    std::snprintf(buf, sizeof(buf), ",%.17g", x);
                    os << buf;
                }
            };
            emit(row.stored_descriptor);
            emit(row.reeval_descriptor_archive);
            emit(row.reeval_descriptor_policy);
            std::snprintf(buf, sizeof(buf), ",%.17g", row.policy_fitness);
            os << buf << '\n';
        }
    }

    inline void save_distillation_json(const std::filesystem::path& path,
        const DistillationReport& rep)
    {
        nlohmann::json j;
        j["archive_qd_score"] = rep.archive_qd_score;
        j["dc_qd_score"] = rep.dc_qd_score;
        j["archive_dem"] = rep.archive_dem;
        j["policy_dem"] = rep.policy_dem;
        j["occupied_cells"] = rep.per_cell.size();
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot write report json: " + path.string());
        os << j.dump(2) << '\n';
    }

} // namespace dcgme
