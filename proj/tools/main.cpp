#include "noisysketch/cli.hpp"

int main(int argc, char** argv) {
    return noisysketch::cli::run(argc, argv);
}
