#include "hlsflow_app.hpp"

int main(int argc, char** argv) {
  return hlsflow::cli::main_impl(argc, argv, hlsflow::cli::Io{std::cout, std::cerr});
}
