#include "puppetai/cli.hpp"

int main(int argc, char** argv) { return puppetai::dispatch(argc, argv); }
