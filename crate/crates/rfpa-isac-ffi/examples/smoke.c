#include <stdio.h>
#include <stdlib.h>
#include "rfpa_isac.h"

int main(void) {
    struct RfpaConfig *cfg = rfpa_config_default();
    if (!cfg) return 1;

    double rate = 0.0;
    if (rfpa_achievable_rate(cfg, RFPA_SCHEME_HYB, &rate) != RFPA_STATUS_OK) return 2;
    printf("hybrid rate: %.0f bit/s\n", rate);
    if (rate < 43e6 || rate > 45e6) return 3;

    size_t m = rfpa_config_antennas(cfg);
    size_t n = rfpa_config_samples_per_pulse(cfg);
    size_t len = 2 * m * n;
    double *iq = malloc(len * sizeof(double));
    size_t written = 0;
    if (rfpa_generate_pulse(cfg, 42, 0, iq, len, &written) != RFPA_STATUS_OK) return 4;
    double energy = 0.0;
    for (size_t i = 0; i < len; i += 2) energy += iq[i] * iq[i] + iq[i + 1] * iq[i + 1];
    printf("pulse energy: %.1f (expect %zu)\n", energy, m * n);
    if (energy < 0.99 * (double)(m * n) || energy > 1.01 * (double)(m * n)) return 5;
    free(iq);

    double re = 0.0, im = 0.0;
    if (rfpa_mimo_af(cfg, 1, 0.0, 0.0, &re, &im) != RFPA_STATUS_OK) return 6;
    printf("AF origin: %.3e\n", re);

    char msg[128];
    struct RfpaConfig *bad = NULL;
    if (rfpa_config_parse("K = 10\nM = 99\n", &bad) != RFPA_STATUS_CONFIG_ERROR) return 7;
    rfpa_last_error_message(msg, sizeof msg);
    printf("expected config error: %s\n", msg);

    rfpa_config_free(cfg);
    printf("version %s\n", rfpa_version());
    return 0;
}
