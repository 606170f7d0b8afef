# Model parameters, errors and run configuration package