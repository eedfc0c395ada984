# Tools module for the Hotelling solver
