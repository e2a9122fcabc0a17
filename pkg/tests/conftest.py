import hypothesis.strategies as st

from cavity_branching.model import SystemParams

rates = st.floats(min_value=0.0, max_value=8.0)
positive_rates = st.floats(min_value=0.05, max_value=8.0)
detunings = st.floats(min_value=-8.0, max_value=8.0)
kappas = st.floats(min_value=0.1, max_value=5.0)

physical_params = st.builds(
    SystemParams,
    gamma_b=rates, gamma_c=rates,
    delta_b=detunings, delta_c=detunings,
    drive_g=rates, drive_detuning=detunings,
    kappa=kappas,
)

decaying_params = st.builds(
    SystemParams,
    gamma_b=positive_rates, gamma_c=positive_rates,
    delta_b=detunings, delta_c=detunings,
    drive_g=rates, drive_detuning=detunings,
    kappa=kappas,
)

complex_points = st.builds(
    complex,
    st.floats(min_value=-10.0, max_value=10.0),
    st.floats(min_value=-10.0, max_value=10.0),
)
