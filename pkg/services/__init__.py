# Services module for the Hotelling solver
