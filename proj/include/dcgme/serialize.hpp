#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <dcgme/nn.hpp>

namespace dcgme {

    namespace detail {

        inline void write_u64_le(std::ostream& os, std::uint64_t v)
        {
            char buf[8];
            for (int i = 0; i < 8; i++)
                buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
            os.write(buf, 8);
        }

        inline std::uint64_t read_u64_le(std::istream& is)
        {
            unsigned char buf[8];
            is.read(reinterpret_cast<char*>(buf), 8);
            if (!is)
                throw std::runtime_error("param file truncated");
            std::uint64_t v = 0;
            for (int i = 0; i < 8; i++)
                v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
            return v;
        }

    } // namespace detail

    // Binary format: u64 little-endian length, then length little-endian doubles.
    inline void save_param_vector(const std::filesystem::path& path, const ParamVector& params)
    {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open for writing: " + path.string());
        detail::write_u64_le(os, params.size());
        for (double x : params)
            detail::write_u64_le(os, std::bit_cast<std::uint64_t>(x));
        if (!os)
            throw std::runtime_error("write failed: " + path.string());
    }

    inline ParamVector load_param_vector(const std::filesystem::path& path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw std::runtime_error("cannot open for reading: " + path.string());
        const std::uint64_t n = detail::read_u64_le(is);
        ParamVector params(n);
        for (std::uint64_t i = 0; i < n; i++)
            params[i] = std::bit_cast<double>(detail::read_u64_le(is));
        return params;
    }

    inline std::string mlp_arch_to_text(const MlpArch& arch)
    {
        std::ostringstream os;
        os << "layers";
        for (std::size_t s : arch.layer_sizes)
            os << ' ' << s;
        os << "\nhidden relu\noutput ";
        if (arch.output == OutputActivation::tanh_scaled) {
            os.precision(17);
            os << "tanh_scaled " << arch.output_bound;
        } else {
            os << "identity";
        }
        os << '\n';
        return os.str();
    }

    inline MlpArch mlp_arch_from_text(const std::string& text)
    {
        std::istringstream is(text);
        std::string tok;
        MlpArch arch;
        if (!(is >> tok) || tok != "layers")
            throw std::runtime_error("arch text: expected 'layers'");
        std::string line;
        std::getline(is, line);
        std::istringstream sizes(line);
        std::size_t s;
        while (sizes >> s)
            arch.layer_sizes.push_back(s);
        if (!(is >> tok) || tok != "hidden")
            throw std::runtime_error("arch text: expected 'hidden'");
        is >> tok; // relu
        if (!(is >> tok) || tok != "output")
            throw std::runtime_error("arch text: expected 'output'");
        is >> tok;
        if (tok == "tanh_scaled") {
            arch.output = OutputActivation::tanh_scaled;
            is >> arch.output_bound;
        } else if (tok == "identity") {
            arch.output = OutputActivation::identity;
        } else {
            throw std::runtime_error("arch text: unknown output activation " + tok);
        }
        arch.validate();
        return arch;
    }

    inline void save_mlp_arch(const std::filesystem::path& path, const MlpArch& arch)
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot open for writing: " + path.string());
        os << mlp_arch_to_text(arch);
    }

    inline MlpArch load_mlp_arch(const std::filesystem::path& path)
    {
        std::ifstream is(path);
        if (!is)
            throw std::runtime_error("cannot open for reading: " + path.string());
        std::stringstream ss;
        ss << is.rdbuf();
        return mlp_arch_from_text(ss.str());
    }

    // Policy on disk = <base>.bin (parameters) + <base>.arch (sidecar text).
    inline void save_policy(const std::filesystem::path& base, const MlpArch& arch,
        const ParamVector& params)
    {
        save_param_vector(base.string() + ".bin", params);
        save_mlp_arch(base.string() + ".arch", arch);
    }

    inline std::pair<MlpArch, ParamVector> load_policy(const std::filesystem::path& base)
    {
        MlpArch arch = load_mlp_arch(base.string() + ".arch");
        ParamVector params = load_param_vector(base.string() + ".bin");
        if (params.size() != arch.param_count())
            throw std::runtime_error("policy file: parameter count does not match arch");
        return {std::move(arch), std::move(params)};
    }

} // namespace dcgme
