/* The public header must compile as C and the library must be usable from C. */
#include <math.h>
#include <stdio.h>

#include "optoent/optoent.h"

int main(void) {
    optoent_system_params p;
    optoent_pulse_params pulse;
    optoent_epr_result r;
    optoent_status st = optoent_baseline(&p);
    if (st != OPTOENT_OK) return 1;
    if (optoent_coupling_for_cooperativity(&p, 1.0, &p.g) != OPTOENT_OK) return 1;
    if (optoent_gamma_opt(&p, &pulse.gamma) != OPTOENT_OK) return 1;
    pulse.t_sep = 0.0;
    pulse.phi = 0.0;
    st = optoent_epr_evaluate(&p, &pulse, OPTOENT_METHOD_CLOSED_FORM, &r);
    if (st != OPTOENT_OK || !(fabs(r.value - 1.5) < 0.03)) {
        fprintf(stderr, "unexpected: %s %g\n", optoent_status_name(st), r.value);
        return 1;
    }
    p.kappa = -1.0;
    if (optoent_epr_evaluate(&p, &pulse, OPTOENT_METHOD_EXACT, &r) != OPTOENT_ERR_CONTRACT) return 1;
    printf("%s: %s\n", optoent_version(), optoent_last_error());
    return 0;
}
