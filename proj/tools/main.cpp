#include "cli/cli_app.hpp"

int main(int argc, char** argv) {
    return gsr::cli::run_cli(argc, argv);
}
