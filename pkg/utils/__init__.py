# Utils module for the Hotelling solver
