#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace barron::cli {

enum ExitCode { ok = 0, internal_error = 1, validation_error = 2, assertion_failed = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// key=value lines ('#' comments) as "--key=value" tokens.
std::vector<std::string> config_file_args(const std::string& text);

// "8..512" (doubling), "1,2,4" or a single value.
std::vector<std::size_t> parse_size_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace barron::cli
