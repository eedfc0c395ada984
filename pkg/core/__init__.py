# Core module for the Hotelling solver
