# Numerical building blocks: measures, increments, schemes, couplings, estimators
