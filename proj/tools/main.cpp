#include <cstdio>

int main()
{
    std::printf("dcgme cli placeholder\n");
    return 0;
}
