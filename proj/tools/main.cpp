#include <iostream>
#include <string>
#include <vector>

#include "whosai/cli.hpp"

int main(int argc, char **argv)
{
	std::vector<std::string> args(argv + 1, argv + argc);
	return whosai::run_cli(args, std::cout, std::cerr, std::cin);
}
