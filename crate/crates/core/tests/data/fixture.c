volatile unsigned tohost __attribute__((section(".tohost")));
static unsigned squares[16];

void _start(void) {
    for (unsigned i = 0; i < 16; i++)
        squares[i] = i * i;
    unsigned sum = 0;
    for (unsigned i = 0; i < 16; i++)
        sum += squares[i];
    tohost = sum;
    for (;;) {
    }
}
