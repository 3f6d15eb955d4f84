// Test double for the external model protocol.
//   model_child sum             echo the sum of each request line
//   model_child crash-after N   answer N requests, then exit with status 3
//   model_child garbage         answer with an unparsable line
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "sum";
    const long limit = argc > 2 ? std::strtol(argv[2], nullptr, 10) : -1;
    std::string line;
    long served = 0;
    while (std::getline(std::cin, line)) {
        if (mode == "crash-after" && served == limit) return 3;
        if (mode == "garbage") {
            std::printf("not-a-number\n");
            std::fflush(stdout);
            continue;
        }
        std::istringstream in(line);
        double x = 0, sum = 0;
        while (in >> x) sum += x;
        std::printf("%.17g\n", sum);
        std::fflush(stdout);
        ++served;
    }
    return 0;
}
