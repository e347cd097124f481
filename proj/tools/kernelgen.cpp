// Build-time kernel variant generator.
//
//   kernelgen template <in.tpl> <out.cpp> NAME=VALUE...
//       Substitutes ${NAME} tokens, then expands line-duplication markers of
//       the form   //#unroll#<code>#<factor-expr>   into <factor> copies of
//       <code> with every '@' replaced by the copy index. The factor is an
//       integer expression and may depend on the substituted values.
//
//   kernelgen dispatch-spmv <out.cpp> --chunks C,C,... --widths W,W,...
//       Emits the SpMV variant dispatch table and the build configuration
//       query functions.
//
//   kernelgen dispatch-tsm <out.cpp> --widths W,W,...
//       Emits fixed-dimension tall-skinny kernel instantiations and their
//       lookup tables.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

[[noreturn]] void die(const std::string& msg) {
    std::cerr << "kernelgen: " << msg << "\n";
    std::exit(1);
}

// minimal integer expression evaluator: + - * / and parentheses
struct ExprParser {
    const std::string& s;
    std::size_t pos = 0;

    explicit ExprParser(const std::string& str) : s(str) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    long parse() {
        long v = term();
        skip();
        while (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
            char op = s[pos++];
            long r = term();
            v = (op == '+') ? v + r : v - r;
            skip();
        }
        return v;
    }
    long term() {
        long v = atom();
        skip();
        while (pos < s.size() && (s[pos] == '*' || s[pos] == '/')) {
            char op = s[pos++];
            long r = atom();
            if (op == '/') {
                if (r == 0) die("division by zero in unroll factor");
                v /= r;
            } else {
                v *= r;
            }
            skip();
        }
        return v;
    }
    long atom() {
        skip();
        if (pos < s.size() && s[pos] == '(') {
            ++pos;
            long v = parse();
            skip();
            if (pos >= s.size() || s[pos] != ')') die("missing ')' in unroll factor");
            ++pos;
            return v;
        }
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) die("bad unroll factor expression: " + s);
        return std::stol(s.substr(start, pos - start));
    }
};

long eval_expr(const std::string& e) {
    ExprParser p(e);
    long v = p.parse();
    p.skip();
    if (p.pos != e.size()) die("trailing characters in unroll factor: " + e);
    return v;
}

std::string substitute(std::string line, const std::map<std::string, std::string>& vars) {
    for (;;) {
        auto b = line.find("${");
        if (b == std::string::npos) return line;
        auto e = line.find('}', b);
        if (e == std::string::npos) die("unterminated ${ in: " + line);
        const std::string name = line.substr(b + 2, e - b - 2);
        auto it = vars.find(name);
        if (it == vars.end()) die("unknown substitution variable: " + name);
        line = line.substr(0, b) + it->second + line.substr(e + 1);
    }
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    std::size_t p = 0;
    while ((p = s.find(from, p)) != std::string::npos) {
        s.replace(p, from.size(), to);
        p += to.size();
    }
    return s;
}

void run_template(const std::string& in_path, const std::string& out_path,
                  const std::map<std::string, std::string>& vars) {
    std::ifstream in(in_path);
    if (!in) die("cannot open template " + in_path);
    std::ostringstream out;
    out << "// Generated by kernelgen from " << in_path << " -- do not edit.\n";
    std::string line;
    while (std::getline(in, line)) {
        line = substitute(line, vars);
        const std::string marker = "//#unroll#";
        auto m = line.find(marker);
        if (m == std::string::npos) {
            out << line << "\n";
            continue;
        }
        const std::string indent = line.substr(0, m);
        const std::string rest = line.substr(m + marker.size());
        auto h = rest.rfind('#');
        if (h == std::string::npos) die("unroll marker without factor: " + line);
        const std::string code = rest.substr(0, h);
        const long factor = eval_expr(rest.substr(h + 1));
        if (factor < 0) die("negative unroll factor");
        for (long i = 0; i < factor; ++i)
            out << indent << replace_all(code, "@", std::to_string(i)) << "\n";
    }
    std::ofstream of(out_path);
    if (!of) die("cannot write " + out_path);
    of << out.str();
}

std::vector<int> parse_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    if (out.empty()) die("empty dimension list");
    return out;
}

void emit_dispatch_spmv(const std::string& out_path, const std::vector<int>& chunks,
                        const std::vector<int>& widths) {
    std::ostringstream o;
    o << "// Generated by kernelgen -- do not edit.\n\n"
      << "#include \"spmv_args.hpp\"\n\n"
      << "namespace sellkit::kernels {\n\n";
    for (int c : chunks)
        for (int w : widths)
            o << "void spmv_d_c" << c << "_w" << w
              << "(const SpmvArgs<double>&, gidx, gidx, double*);\n";
    for (int c : chunks)
        o << "void spmv_d_c" << c << "_wg(const SpmvArgs<double>&, gidx, gidx, double*);\n";
    for (int w : widths)
        o << "void spmv_d_cg_w" << w << "(const SpmvArgs<double>&, gidx, gidx, double*);\n";
    o << "\nstatic const SpmvVariantEntry variant_table[] = {\n";
    for (int c : chunks)
        for (int w : widths)
            o << "    {" << c << ", " << w << ", &spmv_d_c" << c << "_w" << w << "},\n";
    for (int c : chunks) o << "    {" << c << ", 0, &spmv_d_c" << c << "_wg},\n";
    for (int w : widths) o << "    {0, " << w << ", &spmv_d_cg_w" << w << "},\n";
    o << "};\n\n";
    auto emit_list = [&](const char* name, const std::vector<int>& v) {
        o << "static const int " << name << "[] = {";
        for (std::size_t i = 0; i < v.size(); ++i) o << (i ? ", " : "") << v[i];
        o << "};\n";
    };
    emit_list("cfg_chunks", chunks);
    emit_list("cfg_widths", widths);
    o << "\nconst SpmvVariantEntry* spmv_variant_table() { return variant_table; }\n"
      << "std::size_t spmv_variant_table_size() { return sizeof(variant_table) / "
         "sizeof(variant_table[0]); }\n"
      << "const int* buildcfg_chunk_heights(std::size_t* n) { *n = " << chunks.size()
      << "; return cfg_chunks; }\n"
      << "const int* buildcfg_block_widths(std::size_t* n) { *n = " << widths.size()
      << "; return cfg_widths; }\n\n"
      << "} // namespace sellkit::kernels\n\n"
      << "namespace sellkit {\n\n"
      << "std::span<const int> specialized_chunk_heights() {\n"
      << "    std::size_t n = 0;\n"
      << "    const int* p = kernels::buildcfg_chunk_heights(&n);\n"
      << "    return {p, n};\n"
      << "}\n"
      << "std::span<const int> specialized_block_widths() {\n"
      << "    std::size_t n = 0;\n"
      << "    const int* p = kernels::buildcfg_block_widths(&n);\n"
      << "    return {p, n};\n"
      << "}\n\n"
      << "} // namespace sellkit\n";
    std::ofstream of(out_path);
    if (!of) die("cannot write " + out_path);
    of << o.str();
}

void emit_dispatch_tsm(const std::string& out_path, const std::vector<int>& widths) {
    std::ostringstream o;
    o << "// Generated by kernelgen -- do not edit.\n\n"
      << "#include \"tsm.hpp\"\n\n"
      << "namespace sellkit::kernels {\n\n"
      << "static const TsmttsmVariant ttsm_table[] = {\n";
    for (int m : widths)
        for (int k : widths)
            o << "    {" << m << ", " << k << ", &tsmttsm_fixed<double, " << m << ", " << k
              << ">},\n";
    o << "};\n\nstatic const TsmmVariant tsmm_table[] = {\n";
    for (int m : widths)
        for (int k : widths)
            o << "    {" << m << ", " << k << ", &tsmm_fixed<double, " << m << ", " << k << ">},\n";
    o << "};\n\n"
      << "const TsmttsmVariant* tsmttsm_variants(std::size_t* n) {\n"
      << "    *n = sizeof(ttsm_table) / sizeof(ttsm_table[0]);\n"
      << "    return ttsm_table;\n"
      << "}\n"
      << "const TsmmVariant* tsmm_variants(std::size_t* n) {\n"
      << "    *n = sizeof(tsmm_table) / sizeof(tsmm_table[0]);\n"
      << "    return tsmm_table;\n"
      << "}\n\n"
      << "} // namespace sellkit::kernels\n";
    std::ofstream of(out_path);
    if (!of) die("cannot write " + out_path);
    of << o.str();
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) die("missing subcommand");
    const std::string cmd = args[0];

    if (cmd == "template") {
        if (args.size() < 3) die("usage: kernelgen template <in> <out> NAME=VALUE...");
        std::map<std::string, std::string> vars;
        for (std::size_t i = 3; i < args.size(); ++i) {
            auto eq = args[i].find('=');
            if (eq == std::string::npos) die("bad NAME=VALUE argument: " + args[i]);
            vars[args[i].substr(0, eq)] = args[i].substr(eq + 1);
        }
        run_template(args[1], args[2], vars);
        return 0;
    }

    auto get_list = [&](const std::string& flag) {
        for (std::size_t i = 0; i + 1 < args.size(); ++i)
            if (args[i] == flag) return parse_list(args[i + 1]);
        die("missing " + flag);
    };

    if (cmd == "dispatch-spmv") {
        if (args.size() < 2) die("usage: kernelgen dispatch-spmv <out> --chunks ... --widths ...");
        emit_dispatch_spmv(args[1], get_list("--chunks"), get_list("--widths"));
        return 0;
    }
    if (cmd == "dispatch-tsm") {
        if (args.size() < 2) die("usage: kernelgen dispatch-tsm <out> --widths ...");
        emit_dispatch_tsm(args[1], get_list("--widths"));
        return 0;
    }
    die("unknown subcommand: " + cmd);
}
