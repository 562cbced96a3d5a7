# rootdir marker so "tests.*" imports resolve under the plain pytest entrypoint
