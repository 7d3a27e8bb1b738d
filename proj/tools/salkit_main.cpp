#include "salkit/cli.hpp"

int main(int argc, char** argv) {
    return salkit::cli::run(argc, argv);
}
